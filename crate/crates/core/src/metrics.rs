//! Run summaries and multi-run aggregation with Student-t confidence intervals.

use serde::Serialize;
use thiserror::Error;

use crate::physiology::Scenario;
use crate::simulator::{RoundRecord, RunResult};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("cannot summarise an empty sample")]
    Empty,
    #[error("unsupported confidence level {0} (supported: 0.90, 0.95, 0.99)")]
    UnsupportedLevel(f64),
}

/// Two-sided Student-t critical values for df = 1..=30.
const T_90: [f64; 30] = [
    6.313752, 2.919986, 2.353363, 2.131847, 2.015048, 1.943180, 1.894579, 1.859548, 1.833113, 1.812461, 1.795885,
    1.782288, 1.770933, 1.761310, 1.753050, 1.745884, 1.739607, 1.734064, 1.729133, 1.724718, 1.720743, 1.717144,
    1.713872, 1.710882, 1.708141, 1.705618, 1.703288, 1.701131, 1.699127, 1.697261,
];
const T_95: [f64; 30] = [
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004, 2.262157, 2.228139, 2.200985,
    2.178813, 2.160369, 2.144787, 2.131450, 2.119905, 2.109816, 2.100922, 2.093024, 2.085963, 2.079614, 2.073873,
    2.068658, 2.063899, 2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272,
];
const T_99: [f64; 30] = [
    63.656741, 9.924843, 5.840909, 4.604095, 4.032143, 3.707428, 3.499483, 3.355387, 3.249836, 3.169273, 3.105807,
    3.054540, 3.012276, 2.976843, 2.946713, 2.920782, 2.898231, 2.878440, 2.860935, 2.845340, 2.831360, 2.818756,
    2.807336, 2.796940, 2.787436, 2.778715, 2.770683, 2.763262, 2.756386, 2.749996,
];

/// Critical value `t` such that `P(|T_df| <= t) = level`.
///
/// Tabulated for df <= 30; beyond that a Cornish-Fisher expansion around the
/// normal quantile is accurate to well under 1e-4.
pub fn t_critical(level: f64, df: u64) -> Result<f64, StatsError> {
    let (table, z) = if (level - 0.90).abs() < 1e-12 {
        (&T_90, 1.6448536269514722)
    } else if (level - 0.95).abs() < 1e-12 {
        (&T_95, 1.959963984540054)
    } else if (level - 0.99).abs() < 1e-12 {
        (&T_99, 2.5758293035489004)
    } else {
        return Err(StatsError::UnsupportedLevel(level));
    };
    if df == 0 {
        return Ok(f64::INFINITY);
    }
    if df as usize <= table.len() {
        return Ok(table[df as usize - 1]);
    }
    let v = df as f64;
    let z2 = z * z;
    let g1 = (z2 + 1.0) * z / 4.0;
    let g2 = ((5.0 * z2 + 16.0) * z2 + 3.0) * z / 96.0;
    let g3 = (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) * z / 384.0;
    let g4 = ((((79.0 * z2 + 776.0) * z2 + 1482.0) * z2 - 1920.0) * z2 - 945.0) * z / 92160.0;
    Ok(z + g1 / v + g2 / v.powi(2) + g3 / v.powi(3) + g4 / v.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub half_width: f64,
}

pub fn confidence_interval(values: &[f64], level: f64) -> Result<ConfidenceInterval, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = values.len();
    if n == 1 || values.iter().all(|&v| v == values[0]) {
        t_critical(level, 1)?;
        return Ok(ConfidenceInterval { mean: values[0], half_width: 0.0 });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = t_critical(level, n as u64 - 1)?;
    Ok(ConfidenceInterval { mean, half_width: t * var.sqrt() / (n as f64).sqrt() })
}

/// A lifetime-style metric that may not have happened before the run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "round")]
pub enum Observed {
    At(u64),
    /// Not observed by the given final round.
    Censored(u64),
}

impl Observed {
    pub fn round(self) -> Option<u64> {
        match self {
            Observed::At(r) => Some(r),
            Observed::Censored(_) => None,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, Observed::Censored(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub first_node_dead: Observed,
    pub last_node_dead: Observed,
    pub throughput: u64,
    pub fatigue_round: Observed,
}

/// Lifetime, throughput and fatigue figures from one run's round records.
pub fn summarize(records: &[RoundRecord], node_count: usize) -> RunSummary {
    let last_round = records.last().map_or(0, |r| r.round);
    let first_where = |pred: &dyn Fn(&RoundRecord) -> bool| {
        records.iter().find(|r| pred(r)).map_or(Observed::Censored(last_round), |r| Observed::At(r.round))
    };
    RunSummary {
        first_node_dead: first_where(&|r| r.alive < node_count),
        last_node_dead: first_where(&|r| r.alive == 0),
        throughput: records.last().map_or(0, |r| r.packets),
        fatigue_round: first_where(&|r| r.fatigued),
    }
}

/// Mean and CI over the runs where the metric was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub interval: Option<ConfidenceInterval>,
    pub observed_runs: usize,
    pub censored_runs: usize,
}

impl MetricSummary {
    fn from_observations(obs: &[Observed], level: f64) -> Result<Self, StatsError> {
        let values: Vec<f64> = obs.iter().filter_map(|o| o.round()).map(|r| r as f64).collect();
        let interval = if values.is_empty() { None } else { Some(confidence_interval(&values, level)?) };
        Ok(Self { interval, observed_runs: values.len(), censored_runs: obs.len() - values.len() })
    }

    fn from_values(values: &[f64], level: f64) -> Result<Self, StatsError> {
        Ok(Self { interval: Some(confidence_interval(values, level)?), observed_runs: values.len(), censored_runs: 0 })
    }

    pub fn mean(&self) -> Option<f64> {
        self.interval.map(|i| i.mean)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub round: u64,
    pub alive: ConfidenceInterval,
    pub packets: ConfidenceInterval,
    pub soldier_energy: ConfidenceInterval,
    pub residual_energy: ConfidenceInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub scenario: Scenario,
    pub level: f64,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunSummary>,
    pub first_node_dead: MetricSummary,
    pub last_node_dead: MetricSummary,
    pub throughput: MetricSummary,
    pub fatigue_round: MetricSummary,
    pub series: Vec<SeriesPoint>,
}

/// Aggregate runs that share a horizon (equal record counts) into means and CIs.
pub fn aggregate(scenario: Scenario, runs: &[RunResult], level: f64) -> Result<ExperimentSummary, StatsError> {
    if runs.is_empty() {
        return Err(StatsError::Empty);
    }
    let summaries: Vec<RunSummary> = runs.iter().map(|r| r.summary).collect();
    let pick = |f: fn(&RunSummary) -> Observed| summaries.iter().map(f).collect::<Vec<_>>();
    let throughput: Vec<f64> = summaries.iter().map(|s| s.throughput as f64).collect();

    let horizon = runs.iter().map(|r| r.records.len()).min().unwrap_or(0);
    let mut series = Vec::with_capacity(horizon);
    let mut column = vec![0.0; runs.len()];
    for i in 0..horizon {
        let mut stat = |f: fn(&RoundRecord) -> f64| -> Result<ConfidenceInterval, StatsError> {
            for (slot, run) in column.iter_mut().zip(runs) {
                *slot = f(&run.records[i]);
            }
            confidence_interval(&column, level)
        };
        series.push(SeriesPoint {
            round: runs[0].records[i].round,
            alive: stat(|r| r.alive as f64)?,
            packets: stat(|r| r.packets as f64)?,
            soldier_energy: stat(|r| r.soldier_energy)?,
            residual_energy: stat(|r| r.residual_energy)?,
        });
    }

    Ok(ExperimentSummary {
        scenario,
        level,
        seeds: runs.iter().map(|r| r.seed).collect(),
        first_node_dead: MetricSummary::from_observations(&pick(|s| s.first_node_dead), level)?,
        last_node_dead: MetricSummary::from_observations(&pick(|s| s.last_node_dead), level)?,
        throughput: MetricSummary::from_values(&throughput, level)?,
        fatigue_round: MetricSummary::from_observations(&pick(|s| s.fatigue_round), level)?,
        runs: summaries,
        series,
    })
}
