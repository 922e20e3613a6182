//! Synthetic physiological signals and the soldier's metabolic energy budget.
//!
//! Temperature and heart rate approach a per-scenario plateau along a
//! first-order exponential; glucose falls linearly to a floor. Readings are
//! a pure function of the round index plus optional Gaussian observation
//! noise, so a run never accumulates drift in the signals.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::config::Violation;

/// Relative slack applied when comparing soldier energy against the fatigue
/// threshold. Linear drain accumulates roughly 1e-13 J of rounding per round.
pub const FATIGUE_REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyProfile {
    pub weight_kg: f64,
    pub height_cm: f64,
    pub age_years: f64,
}

impl Default for BodyProfile {
    fn default() -> Self {
        Self { weight_kg: 70.0, height_cm: 175.0, age_years: 25.0 }
    }
}

impl BodyProfile {
    pub(crate) fn violations(&self, prefix: &str) -> Vec<Violation> {
        [("weight_kg", self.weight_kg), ("height_cm", self.height_cm), ("age_years", self.age_years)]
            .into_iter()
            .filter(|(_, v)| !(v.is_finite() && *v >= 0.0))
            .map(|(name, v)| {
                Violation::new(
                    format!("{prefix}.{name}"),
                    format!("BodyProfile: {name} must be non-negative and finite, got {v}"),
                )
            })
            .collect()
    }
}

/// Harris-Benedict basal metabolic rate in kcal/day.
pub fn bmr(profile: &BodyProfile) -> f64 {
    let weight_term = 13.75 * profile.weight_kg;
    let height_term = 5.003 * profile.height_cm;
    let age_term = 6.775 * profile.age_years;
    66.5 + weight_term + height_term - age_term
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Walking,
    SlowRunning,
    FastRunning,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Walking, Scenario::SlowRunning, Scenario::FastRunning];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Walking => "walking",
            Scenario::SlowRunning => "slow_running",
            Scenario::FastRunning => "fast_running",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "walking" | "walk" => Ok(Scenario::Walking),
            "slow_running" | "slow" => Ok(Scenario::SlowRunning),
            "fast_running" | "fast" => Ok(Scenario::FastRunning),
            other => Err(format!("unknown scenario `{other}` (expected walking, slow or fast)")),
        }
    }
}

/// Observation noise standard deviation per signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalNoise {
    pub temperature: f64,
    pub heart_rate: f64,
    pub glucose: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub scenario: Scenario,
    pub speed_mph: f64,
    /// Soldier energy spent per round, J.
    pub drain_rate: f64,
    pub temp_plateau: f64,
    pub temp_time_constant: f64,
    pub hr_plateau: f64,
    pub hr_time_constant: f64,
    /// mg/dL per round; negative.
    pub glucose_slope: f64,
    pub noise: SignalNoise,
}

impl ScenarioParams {
    /// Defaults for one movement model. Drain rates are calibrated so that
    /// 1000 J (2500 J down to 1500 J) is spent in exactly 10182, 6454 and
    /// 3811 rounds respectively.
    pub fn defaults(scenario: Scenario) -> Self {
        let noise = SignalNoise { temperature: 0.05, heart_rate: 2.0, glucose: 1.0 };
        match scenario {
            Scenario::Walking => Self {
                scenario,
                speed_mph: 3.0,
                drain_rate: 1000.0 / 10182.0,
                temp_plateau: 37.6,
                temp_time_constant: 600.0,
                hr_plateau: 105.0,
                hr_time_constant: 600.0,
                glucose_slope: -0.01,
                noise,
            },
            Scenario::SlowRunning => Self {
                scenario,
                speed_mph: 5.0,
                drain_rate: 1000.0 / 6454.0,
                temp_plateau: 38.4,
                temp_time_constant: 300.0,
                hr_plateau: 140.0,
                hr_time_constant: 300.0,
                glucose_slope: -0.02,
                noise,
            },
            Scenario::FastRunning => Self {
                scenario,
                speed_mph: 7.0,
                drain_rate: 1000.0 / 3811.0,
                temp_plateau: 39.2,
                temp_time_constant: 150.0,
                hr_plateau: 175.0,
                hr_time_constant: 150.0,
                glucose_slope: -0.04,
                noise,
            },
        }
    }

    pub(crate) fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut require = |ok: bool, field: &str, rule: String| {
            if !ok {
                out.push(Violation::new(format!("{prefix}.{field}"), rule));
            }
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        require(positive(self.speed_mph), "speed_mph", format!("speed must be positive, got {}", self.speed_mph));
        require(positive(self.drain_rate), "drain_rate", format!("drain_rate must be > 0, got {}", self.drain_rate));
        require(
            positive(self.temp_time_constant),
            "temp_time_constant",
            format!("time constants must be > 0, got {}", self.temp_time_constant),
        );
        require(
            positive(self.hr_time_constant),
            "hr_time_constant",
            format!("time constants must be > 0, got {}", self.hr_time_constant),
        );
        require(
            self.glucose_slope.is_finite() && self.glucose_slope < 0.0,
            "glucose_slope",
            format!("glucose_slope must be negative, got {}", self.glucose_slope),
        );
        require(self.temp_plateau.is_finite(), "temp_plateau", "temp_plateau must be finite".into());
        require(self.hr_plateau.is_finite(), "hr_plateau", "hr_plateau must be finite".into());
        for (name, sd) in [
            ("noise.temperature", self.noise.temperature),
            ("noise.heart_rate", self.noise.heart_rate),
            ("noise.glucose", self.noise.glucose),
        ] {
            require(sd.is_finite() && sd >= 0.0, name, format!("noise stddev must be >= 0, got {sd}"));
        }
        out
    }
}

/// Resting values the trajectories start from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Baseline {
    pub temperature: f64,
    pub heart_rate: f64,
    pub glucose: f64,
    pub glucose_floor: f64,
}

impl Default for Baseline {
    fn default() -> Self {
        Self { temperature: 37.0, heart_rate: 70.0, glucose: 95.0, glucose_floor: 55.0 }
    }
}

impl Baseline {
    pub(crate) fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, v) in [
            ("temperature", self.temperature),
            ("heart_rate", self.heart_rate),
            ("glucose", self.glucose),
            ("glucose_floor", self.glucose_floor),
        ] {
            if !v.is_finite() {
                out.push(Violation::new(format!("{prefix}.{name}"), format!("{name} must be finite")));
            }
        }
        if self.glucose_floor > self.glucose {
            out.push(Violation::new(
                format!("{prefix}.glucose_floor"),
                format!(
                    "glucose_floor ({}) must not exceed the starting glucose ({})",
                    self.glucose_floor, self.glucose
                ),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FatigueConfig {
    pub initial_energy: f64,
    pub fatigue_threshold: f64,
}

impl Default for FatigueConfig {
    fn default() -> Self {
        Self { initial_energy: 2500.0, fatigue_threshold: 1500.0 }
    }
}

impl FatigueConfig {
    pub(crate) fn violations(&self, prefix: &str) -> Vec<Violation> {
        let ok = self.initial_energy.is_finite()
            && self.fatigue_threshold.is_finite()
            && 0.0 < self.fatigue_threshold
            && self.fatigue_threshold < self.initial_energy;
        if ok {
            Vec::new()
        } else {
            vec![Violation::new(
                format!("{prefix}.threshold_j"),
                format!(
                    "FatigueConfig: require 0 < fatigue_threshold ({}) < initial_energy ({})",
                    self.fatigue_threshold, self.initial_energy
                ),
            )]
        }
    }

    /// Round at which a linear drain first reaches the threshold.
    pub fn closed_form_fatigue_round(&self, drain_rate: f64) -> u64 {
        let budget = self.initial_energy - self.fatigue_threshold;
        let slack = FATIGUE_REL_TOLERANCE * self.fatigue_threshold.abs().max(1.0);
        ((budget - slack) / drain_rate).ceil().max(0.0) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysioState {
    pub temperature: f64,
    pub heart_rate: f64,
    pub glucose: f64,
    pub soldier_energy: f64,
    pub round: u64,
}

impl PhysioState {
    pub fn initial(baseline: &Baseline, fatigue: &FatigueConfig) -> Self {
        Self {
            temperature: baseline.temperature,
            heart_rate: baseline.heart_rate,
            glucose: baseline.glucose,
            soldier_energy: fatigue.initial_energy,
            round: 0,
        }
    }
}

/// Seeded Gaussian noise. A disabled source never touches its generator.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
    enabled: bool,
}

impl NoiseSource {
    pub fn new(seed: u64, enabled: bool) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), enabled }
    }

    pub fn disabled() -> Self {
        Self::new(0, false)
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Zero-mean draw with the given standard deviation.
    pub fn sample(&mut self, stddev: f64) -> f64 {
        if !self.enabled || stddev == 0.0 {
            return 0.0;
        }
        // stddev is validated finite and non-negative upstream
        Normal::new(0.0, stddev).map(|n| n.sample(&mut self.rng)).unwrap_or(0.0)
    }
}

fn saturating_approach(base: f64, plateau: f64, time_constant: f64, t: f64) -> f64 {
    base + (plateau - base) * (1.0 - (-t / time_constant).exp())
}

/// Noise-free signal values at round `t`: (temperature, heart rate, glucose).
pub fn clean_signals(baseline: &Baseline, scenario: &ScenarioParams, t: u64) -> (f64, f64, f64) {
    let tf = t as f64;
    let temperature = saturating_approach(baseline.temperature, scenario.temp_plateau, scenario.temp_time_constant, tf);
    let heart_rate = saturating_approach(baseline.heart_rate, scenario.hr_plateau, scenario.hr_time_constant, tf);
    let glucose = (baseline.glucose + scenario.glucose_slope * tf).max(baseline.glucose_floor);
    (temperature, heart_rate, glucose)
}

/// Advance the signals by one round.
pub fn step_signals(
    state: &PhysioState,
    baseline: &Baseline,
    scenario: &ScenarioParams,
    noise: &mut NoiseSource,
) -> PhysioState {
    let round = state.round + 1;
    let (temperature, heart_rate, glucose) = clean_signals(baseline, scenario, round);
    PhysioState {
        temperature: temperature + noise.sample(scenario.noise.temperature),
        heart_rate: heart_rate + noise.sample(scenario.noise.heart_rate),
        glucose: (glucose + noise.sample(scenario.noise.glucose)).max(baseline.glucose_floor),
        soldier_energy: state.soldier_energy,
        round,
    }
}

/// Spend one round of soldier energy.
pub fn expend(state: &PhysioState, scenario: &ScenarioParams) -> PhysioState {
    PhysioState { soldier_energy: (state.soldier_energy - scenario.drain_rate).max(0.0), ..*state }
}

/// Inclusive: reaching the threshold counts as fatigue.
pub fn is_fatigued(state: &PhysioState, cfg: &FatigueConfig) -> bool {
    let slack = FATIGUE_REL_TOLERANCE * cfg.fatigue_threshold.abs().max(1.0);
    state.soldier_energy <= cfg.fatigue_threshold + slack
}
