//! Round-based engine: one world per run, one record per round.
//!
//! Each round runs, in order: signal update, soldier energy drain, node
//! decisions and transmissions, then the base station's fatigue check.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{format_violations, Violation};
use crate::metrics::{aggregate, summarize, ExperimentSummary, RunSummary, StatsError};
use crate::nodes::{alive_count, BaseStation, Decision, NodeParams, SensorKind, SensorNode, TransmitRule};
use crate::physiology::{
    expend, is_fatigued, step_signals, Baseline, FatigueConfig, NoiseSource, PhysioState, Scenario, ScenarioParams,
};
use crate::radio_energy::RadioParams;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config:\n{}", format_violations(.0))]
    InvalidConfig(Vec<Violation>),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}

/// Everything one scenario's runs need.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub scenario: ScenarioParams,
    pub radio: RadioParams,
    pub nodes: Vec<NodeParams>,
    pub rule: TransmitRule,
    pub fatigue: FatigueConfig,
    pub baseline: Baseline,
    pub max_rounds: u64,
    pub round_duration_s: f64,
    pub seed: u64,
    pub runs: usize,
    pub noise: bool,
    pub ci_level: f64,
}

impl SimConfig {
    pub fn defaults(scenario: Scenario) -> Self {
        crate::config::Config::default().sim_config(scenario)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.max_rounds == 0 {
            out.push(Violation::new("max_rounds", "max_rounds must be > 0"));
        }
        if self.runs == 0 {
            out.push(Violation::new("runs", "runs must be >= 1"));
        }
        if self.round_duration_s != 1.0 {
            out.push(Violation::new("round_duration_s", "round duration is fixed at 1 s"));
        }
        if self.nodes.is_empty() {
            out.push(Violation::new("nodes", "at least one sensor node is required"));
        }
        if let TransmitRule::Periodic { interval: 0 } = self.rule {
            out.push(Violation::new("rule", "periodic interval must be >= 1"));
        }
        out.extend(self.radio.violations("radio"));
        out.extend(self.fatigue.violations("fatigue"));
        out.extend(self.baseline.violations("baseline"));
        out.extend(self.scenario.violations("scenario"));
        for (i, n) in self.nodes.iter().enumerate() {
            out.extend(n.violations(&format!("nodes[{i}]")));
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(v))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub alive: usize,
    /// Cumulative packets received at the base station.
    pub packets: u64,
    /// Sum of residual energy over all nodes, J.
    pub residual_energy: f64,
    pub soldier_energy: f64,
    pub fatigued: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeOutcome {
    pub kind: SensorKind,
    pub tx_count: u64,
    pub residual_energy: f64,
    pub death_round: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub summary: RunSummary,
    pub nodes: Vec<NodeOutcome>,
}

/// Mutable world of a single run.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    seed: u64,
    physio: PhysioState,
    nodes: Vec<SensorNode>,
    bs: BaseStation,
    noise: NoiseSource,
    records: Vec<RoundRecord>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig, seed: u64) -> Result<Self, SimError> {
        cfg.validate()?;
        let nodes = cfg.nodes.iter().enumerate().map(|(id, p)| SensorNode::new(id, *p, cfg.rule)).collect();
        Ok(Self {
            physio: PhysioState::initial(&cfg.baseline, &cfg.fatigue),
            nodes,
            bs: BaseStation::new(),
            noise: NoiseSource::new(seed, cfg.noise),
            records: Vec::new(),
            seed,
            cfg: cfg.clone(),
        })
    }

    pub fn round(&self) -> u64 {
        self.physio.round
    }

    pub fn physio(&self) -> &PhysioState {
        &self.physio
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn base_station(&self) -> &BaseStation {
        &self.bs
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    /// All nodes dead and fatigue reached, or the round cap hit.
    pub fn is_finished(&self) -> bool {
        self.round() >= self.cfg.max_rounds || (alive_count(&self.nodes) == 0 && self.bs.fatigue_reported())
    }

    fn reading(&self, kind: SensorKind) -> f64 {
        match kind {
            SensorKind::Temperature => self.physio.temperature,
            SensorKind::Glucose => self.physio.glucose,
            SensorKind::Heartbeat => self.physio.heart_rate,
        }
    }

    pub fn run_round(&mut self) -> RoundRecord {
        let signals = step_signals(&self.physio, &self.cfg.baseline, &self.cfg.scenario, &mut self.noise);
        self.physio = expend(&signals, &self.cfg.scenario);
        let round = self.physio.round;

        for i in 0..self.nodes.len() {
            let reading = self.reading(self.nodes[i].kind());
            let node = &mut self.nodes[i];
            if !node.is_alive() {
                continue;
            }
            // alive nodes never yield errors; default parameters are validated up front
            if let Ok(Decision::Transmit) = node.decide(reading, round) {
                let _ = node.transmit(reading, round, &mut self.bs, &self.cfg.radio);
            }
        }

        let fatigued = is_fatigued(&self.physio, &self.cfg.fatigue);
        self.bs.observe_fatigue(fatigued, round);

        let record = RoundRecord {
            round,
            alive: alive_count(&self.nodes),
            packets: self.bs.total_packets(),
            residual_energy: self.nodes.iter().map(|n| n.residual_energy()).sum(),
            soldier_energy: self.physio.soldier_energy,
            fatigued,
        };
        self.records.push(record);
        record
    }

    pub fn run_to_end(&mut self) {
        while !self.is_finished() {
            self.run_round();
        }
    }

    /// Keep stepping past natural termination, up to `round` (and never past
    /// the round cap).
    pub fn extend_to(&mut self, round: u64) {
        while self.round() < round.min(self.cfg.max_rounds) {
            self.run_round();
        }
    }

    pub fn into_result(self) -> RunResult {
        let summary = summarize(&self.records, self.nodes.len());
        RunResult {
            seed: self.seed,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeOutcome {
                    kind: n.kind(),
                    tx_count: n.tx_count(),
                    residual_energy: n.residual_energy(),
                    death_round: n.death_round(),
                })
                .collect(),
            summary,
            records: self.records,
        }
    }
}

/// One complete run. Deterministic in `(cfg, seed)`.
pub fn run_simulation(cfg: &SimConfig, seed: u64) -> Result<RunResult, SimError> {
    let mut sim = Simulation::new(cfg, seed)?;
    sim.run_to_end();
    Ok(sim.into_result())
}

/// Seeds used by an experiment: consecutive offsets from the base seed.
pub fn experiment_seeds(cfg: &SimConfig) -> Vec<u64> {
    (0..cfg.runs as u64).map(|i| cfg.seed.wrapping_add(i)).collect()
}

/// Run `cfg.runs` simulations and aggregate them.
///
/// Runs that finish early are stepped on to the longest run's final round so
/// every per-round series covers the same horizon.
pub fn run_experiment(cfg: &SimConfig) -> Result<ExperimentSummary, SimError> {
    run_experiment_with_threads(cfg, None)
}

pub fn run_experiment_with_threads(cfg: &SimConfig, threads: Option<usize>) -> Result<ExperimentSummary, SimError> {
    let results = run_all(cfg, threads)?;
    Ok(aggregate(cfg.scenario.scenario, &results, cfg.ci_level)?)
}

/// Raw per-run results of an experiment, padded to a common horizon.
pub fn run_all(cfg: &SimConfig, threads: Option<usize>) -> Result<Vec<RunResult>, SimError> {
    cfg.validate()?;
    let seeds = experiment_seeds(cfg);
    let work = || -> Result<Vec<RunResult>, SimError> {
        let mut sims = seeds
            .par_iter()
            .map(|&seed| {
                let mut sim = Simulation::new(cfg, seed)?;
                sim.run_to_end();
                Ok(sim)
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        let horizon = sims.iter().map(Simulation::round).max().unwrap_or(0);
        sims.par_iter_mut().for_each(|sim| sim.extend_to(horizon));
        Ok(sims.into_iter().map(Simulation::into_result).collect())
    };
    match threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(work),
    }
}
