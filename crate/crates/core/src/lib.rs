//! Round-based simulator of a three-sensor wireless body area network worn by
//! a soldier.
//!
//! Temperature, glucose and heartbeat sensors report to a wrist-mounted base
//! station only when their readings cross configured thresholds. Transmission
//! costs follow a first-order radio model, and the soldier's metabolic energy
//! drains each round until the fatigue threshold is reached. Experiments
//! repeat a scenario over consecutive seeds and report means with Student-t
//! confidence intervals.

pub mod cli;
pub mod config;
pub mod metrics;
pub mod nodes;
pub mod output;
pub mod physiology;
pub mod radio_energy;
pub mod simulator;

pub use config::{Config, ConfigError, ScenarioSelection, Violation};
pub use metrics::{confidence_interval, summarize, ConfidenceInterval, ExperimentSummary, Observed, RunSummary};
pub use nodes::{alive_count, BaseStation, Decision, Direction, NodeParams, SensorKind, SensorNode, TransmitRule};
pub use physiology::{bmr, BodyProfile, FatigueConfig, PhysioState, Scenario, ScenarioParams};
pub use radio_energy::{receive_energy, transmit_energy, RadioParams};
pub use simulator::{run_experiment, run_simulation, RoundRecord, RunResult, SimConfig, Simulation};
