//! CSV and manifest rendering for experiment bundles.

use serde::Serialize;

use crate::metrics::{ConfidenceInterval, ExperimentSummary, MetricSummary, SeriesPoint};

/// The four per-round series written for every scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    Alive,
    Packets,
    SoldierEnergy,
    ResidualEnergy,
}

impl Series {
    pub const ALL: [Series; 4] = [Series::Alive, Series::Packets, Series::SoldierEnergy, Series::ResidualEnergy];

    /// Column name, shared with the round-record schema.
    pub fn column(self) -> &'static str {
        match self {
            Series::Alive => "alive",
            Series::Packets => "packets",
            Series::SoldierEnergy => "soldier_energy_j",
            Series::ResidualEnergy => "residual_energy_j",
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            Series::Alive => "alive",
            Series::Packets => "packets",
            Series::SoldierEnergy => "soldier_energy",
            Series::ResidualEnergy => "residual_energy",
        }
    }

    fn pick(self, p: &SeriesPoint) -> ConfidenceInterval {
        match self {
            Series::Alive => p.alive,
            Series::Packets => p.packets,
            Series::SoldierEnergy => p.soldier_energy,
            Series::ResidualEnergy => p.residual_energy,
        }
    }
}

/// Fixed nine-significant-digit decimal notation.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0.00000000".into() } else { format!("{x}") };
    }
    let int_digits = x.abs().log10().floor() as i32 + 1;
    let decimals = (9 - int_digits).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn series_file_name(summary: &ExperimentSummary, series: Series) -> String {
    format!("{}_{}.csv", summary.scenario.name(), series.file_stem())
}

pub fn render_series(summary: &ExperimentSummary, series: Series) -> String {
    let col = series.column();
    let mut out = format!("round,{col},{col}_ci90\n");
    for point in &summary.series {
        let ci = series.pick(point);
        out.push_str(&format!("{},{},{}\n", point.round, sig9(ci.mean), sig9(ci.half_width)));
    }
    out
}

pub const SUMMARY_HEADER: &str = "scenario,first_dead_mean,first_dead_ci,last_dead_mean,last_dead_ci,\
throughput_mean,throughput_ci,fatigue_round_mean,fatigue_round_ci,censored_flags";

fn metric_cells(m: &MetricSummary) -> String {
    match m.interval {
        Some(ci) => format!("{:.3},{:.3}", ci.mean, ci.half_width),
        None => ",".into(),
    }
}

fn censored_flags(s: &ExperimentSummary) -> String {
    let runs = s.runs.len();
    let flags: Vec<String> =
        [("first_dead", &s.first_node_dead), ("last_dead", &s.last_node_dead), ("fatigue_round", &s.fatigue_round)]
            .into_iter()
            .filter(|(_, m)| m.censored_runs > 0)
            .map(|(name, m)| format!("{name}={}/{runs}", m.censored_runs))
            .collect();
    if flags.is_empty() {
        "none".into()
    } else {
        flags.join(";")
    }
}

pub fn render_summary(summaries: &[ExperimentSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.scenario.name(),
            metric_cells(&s.first_node_dead),
            metric_cells(&s.last_node_dead),
            metric_cells(&s.throughput),
            metric_cells(&s.fatigue_round),
            censored_flags(s),
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub runs: usize,
    pub max_rounds: u64,
    pub noise: bool,
    pub scenarios: Vec<String>,
    pub files: Vec<String>,
    /// Fully resolved configuration; feeding it back reproduces the bundle.
    pub config: String,
}
