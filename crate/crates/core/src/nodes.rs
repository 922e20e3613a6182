//! On-body sensor nodes and the wrist-mounted base station.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::config::Violation;
use crate::radio_energy::{receive_energy, transmit_energy, RadioError, RadioParams};

#[derive(Debug, Error, PartialEq)]
pub enum NodeError {
    #[error("node {0} is dead")]
    Dead(usize),
    #[error(transparent)]
    Radio(#[from] RadioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    Temperature,
    Glucose,
    Heartbeat,
}

impl SensorKind {
    pub const ALL: [SensorKind; 3] = [SensorKind::Temperature, SensorKind::Glucose, SensorKind::Heartbeat];

    pub fn name(self) -> &'static str {
        match self {
            SensorKind::Temperature => "temperature",
            SensorKind::Glucose => "glucose",
            SensorKind::Heartbeat => "heartbeat",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which side of the hard threshold counts as an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Rising,
    Falling,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rising" => Ok(Direction::Rising),
            "falling" => Ok(Direction::Falling),
            other => Err(format!("expected `rising` or `falling`, got `{other}`")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Rising => "rising",
            Direction::Falling => "falling",
        })
    }
}

/// When a node decides to send a reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmitRule {
    /// Every sampling round on which the reading is beyond the hard threshold.
    Level,
    /// Beyond the hard threshold and moved by at least the soft threshold
    /// since the last transmitted value.
    HardSoft,
    /// Unconditionally every `interval` rounds, ignoring readings.
    Periodic { interval: u64 },
}

impl TransmitRule {
    pub fn name(self) -> &'static str {
        match self {
            TransmitRule::Level => "level",
            TransmitRule::HardSoft => "hard_soft",
            TransmitRule::Periodic { .. } => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Transmit,
    Sleep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    Asleep,
    Dead,
}

/// Static configuration of one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeParams {
    pub kind: SensorKind,
    pub initial_energy: f64,
    pub payload_bits: u64,
    pub distance_m: f64,
    /// Overrides the radio's exponent for this link.
    pub path_loss_exponent: Option<f64>,
    pub hard_threshold: f64,
    pub soft_threshold: f64,
    pub direction: Direction,
    pub sample_interval: u64,
}

impl NodeParams {
    pub fn defaults(kind: SensorKind) -> Self {
        match kind {
            SensorKind::Temperature => Self {
                kind,
                initial_energy: 0.3,
                payload_bits: 2400,
                distance_m: 0.25,
                path_loss_exponent: None,
                hard_threshold: 37.5,
                soft_threshold: 0.1,
                direction: Direction::Rising,
                sample_interval: 1,
            },
            SensorKind::Glucose => Self {
                kind,
                initial_energy: 0.3,
                payload_bits: 2400,
                distance_m: 0.25,
                path_loss_exponent: None,
                hard_threshold: 70.0,
                soft_threshold: 2.0,
                direction: Direction::Falling,
                sample_interval: 60,
            },
            SensorKind::Heartbeat => Self {
                kind,
                initial_energy: 0.3,
                payload_bits: 240,
                distance_m: 0.60,
                path_loss_exponent: None,
                hard_threshold: 100.0,
                soft_threshold: 2.0,
                direction: Direction::Rising,
                sample_interval: 1,
            },
        }
    }

    /// Radio coefficients for this node's link.
    pub fn link_radio(&self, radio: &RadioParams) -> RadioParams {
        match self.path_loss_exponent {
            Some(n) => radio.with_exponent(n),
            None => *radio,
        }
    }

    /// Energy of one transmission from this node.
    pub fn transmit_cost(&self, radio: &RadioParams) -> Result<f64, RadioError> {
        transmit_energy(&self.link_radio(radio), self.payload_bits, self.distance_m)
    }

    pub(crate) fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, rule: String| out.push(Violation::new(format!("{prefix}.{field}"), rule));
        if !(self.initial_energy.is_finite() && self.initial_energy > 0.0) {
            push("initial_energy_j", format!("initial energy must be > 0, got {}", self.initial_energy));
        }
        if self.payload_bits == 0 {
            push("payload_bits", "payload must be at least one bit".into());
        }
        if !(self.distance_m.is_finite() && self.distance_m >= 0.0) {
            push("distance_m", format!("distance must be finite and >= 0, got {}", self.distance_m));
        }
        if let Some(n) = self.path_loss_exponent {
            if !(n.is_finite() && (2.0..=6.0).contains(&n)) {
                push("path_loss_exponent", format!("RadioParams: path_loss_exponent must lie in [2.0, 6.0], got {n}"));
            }
        }
        if !self.hard_threshold.is_finite() {
            push("hard_threshold", "hard threshold must be finite".into());
        }
        if !(self.soft_threshold.is_finite() && self.soft_threshold >= 0.0) {
            push("soft_threshold", format!("soft threshold must be >= 0, got {}", self.soft_threshold));
        }
        if self.sample_interval == 0 {
            push("sample_interval", "sample interval must be at least 1 round".into());
        }
        out
    }
}

/// Outcome of a transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TxOutcome {
    /// Packet delivered; the node may have died afterwards if it cannot
    /// afford another packet.
    Delivered { cost: f64 },
    /// The node could not pay for the packet and is now dead.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorNode {
    pub id: usize,
    pub params: NodeParams,
    pub rule: TransmitRule,
    residual_energy: f64,
    spent_energy: f64,
    last_transmitted_value: Option<f64>,
    state: NodeState,
    tx_count: u64,
    death_round: Option<u64>,
}

impl SensorNode {
    pub fn new(id: usize, params: NodeParams, rule: TransmitRule) -> Self {
        Self {
            id,
            params,
            rule,
            residual_energy: params.initial_energy,
            spent_energy: 0.0,
            last_transmitted_value: None,
            state: NodeState::Asleep,
            tx_count: 0,
            death_round: None,
        }
    }

    pub fn kind(&self) -> SensorKind {
        self.params.kind
    }

    pub fn residual_energy(&self) -> f64 {
        self.residual_energy
    }

    /// Sum of every transmission cost paid so far.
    pub fn spent_energy(&self) -> f64 {
        self.spent_energy
    }

    pub fn tx_count(&self) -> u64 {
        self.tx_count
    }

    pub fn state(&self) -> NodeState {
        self.state
    }

    pub fn is_alive(&self) -> bool {
        self.state != NodeState::Dead
    }

    pub fn death_round(&self) -> Option<u64> {
        self.death_round
    }

    pub fn last_transmitted_value(&self) -> Option<f64> {
        self.last_transmitted_value
    }

    pub fn is_sampling_round(&self, round: u64) -> bool {
        let interval = match self.rule {
            TransmitRule::Periodic { interval } => interval,
            _ => self.params.sample_interval,
        };
        interval > 0 && round.is_multiple_of(interval)
    }

    pub fn decide(&self, reading: f64, round: u64) -> Result<Decision, NodeError> {
        if !self.is_alive() {
            return Err(NodeError::Dead(self.id));
        }
        if !self.is_sampling_round(round) {
            return Ok(Decision::Sleep);
        }
        let beyond_hard = match self.params.direction {
            Direction::Rising => reading >= self.params.hard_threshold,
            Direction::Falling => reading <= self.params.hard_threshold,
        };
        let send = match self.rule {
            TransmitRule::Periodic { .. } => true,
            TransmitRule::Level => beyond_hard,
            TransmitRule::HardSoft => {
                beyond_hard
                    && self
                        .last_transmitted_value
                        .is_none_or(|last| (reading - last).abs() >= self.params.soft_threshold)
            }
        };
        Ok(if send { Decision::Transmit } else { Decision::Sleep })
    }

    /// Send `reading` to the base station. A node that cannot afford the
    /// packet dies without sending; a node left unable to afford the next
    /// packet dies right after sending.
    pub fn transmit(
        &mut self,
        reading: f64,
        round: u64,
        bs: &mut BaseStation,
        radio: &RadioParams,
    ) -> Result<TxOutcome, NodeError> {
        if !self.is_alive() {
            return Err(NodeError::Dead(self.id));
        }
        let cost = self.params.transmit_cost(radio)?;
        if self.residual_energy < cost {
            self.die(round);
            return Ok(TxOutcome::Exhausted);
        }
        self.residual_energy -= cost;
        self.spent_energy += cost;
        self.tx_count += 1;
        self.last_transmitted_value = Some(reading);
        bs.receive(self.kind(), self.params.payload_bits, radio);
        if self.residual_energy < cost {
            self.die(round);
        }
        Ok(TxOutcome::Delivered { cost })
    }

    fn die(&mut self, round: u64) {
        self.state = NodeState::Dead;
        self.death_round = Some(round);
    }
}

pub fn alive_count(nodes: &[SensorNode]) -> usize {
    nodes.iter().filter(|n| n.is_alive()).count()
}

/// Energy-unconstrained sink on the wrist.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BaseStation {
    packets_received: [u64; 3],
    rx_energy_j: f64,
    fatigue_round: Option<u64>,
}

impl BaseStation {
    pub fn new() -> Self {
        Self::default()
    }

    fn receive(&mut self, kind: SensorKind, bits: u64, radio: &RadioParams) {
        self.packets_received[kind.index()] += 1;
        self.rx_energy_j += receive_energy(radio, bits);
    }

    pub fn packets_from(&self, kind: SensorKind) -> u64 {
        self.packets_received[kind.index()]
    }

    pub fn total_packets(&self) -> u64 {
        self.packets_received.iter().sum()
    }

    pub fn rx_energy(&self) -> f64 {
        self.rx_energy_j
    }

    /// Latches the first round the soldier was observed fatigued.
    pub fn observe_fatigue(&mut self, fatigued: bool, round: u64) {
        if fatigued && self.fatigue_round.is_none() {
            self.fatigue_round = Some(round);
        }
    }

    pub fn fatigue_reported(&self) -> bool {
        self.fatigue_round.is_some()
    }

    pub fn fatigue_round(&self) -> Option<u64> {
        self.fatigue_round
    }
}
