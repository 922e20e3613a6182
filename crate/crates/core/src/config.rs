//! Flat `key = value` configuration files.
//!
//! Lines hold one dotted key and a value; `#` starts a comment. Unknown keys,
//! malformed values and duplicate keys are all reported, never silently
//! dropped. Numeric values may be written as a ratio (`1000/10182`).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::nodes::{Direction, NodeParams, SensorKind, TransmitRule};
use crate::physiology::{Baseline, BodyProfile, FatigueConfig, Scenario, ScenarioParams};
use crate::radio_energy::{RadioParams, NANO};
use crate::simulator::SimConfig;

/// One invariant or parse failure, tied to the config key that caused it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { field: field.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

pub fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScenarioSelection {
    All,
    One(Scenario),
}

impl ScenarioSelection {
    pub fn scenarios(self) -> Vec<Scenario> {
        match self {
            ScenarioSelection::All => Scenario::ALL.to_vec(),
            ScenarioSelection::One(s) => vec![s],
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "all" {
            Ok(ScenarioSelection::All)
        } else {
            s.parse().map(ScenarioSelection::One)
        }
    }
}

impl fmt::Display for ScenarioSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioSelection::All => f.write_str("all"),
            ScenarioSelection::One(s) => f.write_str(s.name()),
        }
    }
}

/// Radio coefficients as written in config files, in nJ/bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadioConfig {
    pub e_tx_elec_nj: f64,
    pub e_rx_elec_nj: f64,
    pub e_amp_nj: f64,
    pub path_loss_exponent: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { e_tx_elec_nj: 16.7, e_rx_elec_nj: 36.1, e_amp_nj: 1.97, path_loss_exponent: 3.38 }
    }
}

impl RadioConfig {
    pub fn to_params(&self) -> RadioParams {
        RadioParams {
            e_tx_elec: self.e_tx_elec_nj * NANO,
            e_rx_elec: self.e_rx_elec_nj * NANO,
            e_amp: self.e_amp_nj * NANO,
            path_loss_exponent: self.path_loss_exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub scenario: ScenarioSelection,
    pub max_rounds: u64,
    pub round_duration_s: f64,
    pub seed: u64,
    pub runs: usize,
    pub noise: bool,
    pub transmit_rule: String,
    pub periodic_interval: u64,
    pub radio: RadioConfig,
    pub fatigue: FatigueConfig,
    pub body: BodyProfile,
    pub baseline: Baseline,
    pub scenarios: [ScenarioParams; 3],
    pub nodes: [NodeParams; 3],
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: ScenarioSelection::All,
            max_rounds: 500_000,
            round_duration_s: 1.0,
            seed: 1,
            runs: 5,
            noise: false,
            transmit_rule: "level".into(),
            periodic_interval: 1,
            radio: RadioConfig::default(),
            fatigue: FatigueConfig::default(),
            body: BodyProfile::default(),
            baseline: Baseline::default(),
            scenarios: Scenario::ALL.map(ScenarioParams::defaults),
            nodes: SensorKind::ALL.map(NodeParams::defaults),
        }
    }
}

type Getter = Box<dyn Fn(&Config) -> String>;
type Setter = Box<dyn Fn(&mut Config, &str) -> Result<(), String>>;

struct Field {
    key: String,
    get: Getter,
    set: Setter,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("expected a number, got `{s}`"));
    match s.split_once('/') {
        Some((num, den)) => {
            let den = parse(den)?;
            if den == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            Ok(parse(num)? / den)
        }
        None => parse(s),
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("expected `on` or `off`, got `{s}`")),
    }
}

fn switch(b: bool) -> String {
    if b { "on" } else { "off" }.to_string()
}

macro_rules! float_field {
    ($fields:ident, $key:expr, |$c:ident| $place:expr) => {
        $fields.push(Field {
            key: $key.to_string(),
            get: Box::new(move |$c: &Config| format!("{}", $place)),
            set: Box::new(move |$c: &mut Config, v: &str| {
                $place = parse_f64(v)?;
                Ok(())
            }),
        });
    };
}

macro_rules! int_field {
    ($fields:ident, $key:expr, |$c:ident| $place:expr) => {
        $fields.push(Field {
            key: $key.to_string(),
            get: Box::new(move |$c: &Config| format!("{}", $place)),
            set: Box::new(move |$c: &mut Config, v: &str| {
                $place = parse_u64(v)?.try_into().map_err(|_| format!("`{v}` is out of range"))?;
                Ok(())
            }),
        });
    };
}

fn fields() -> Vec<Field> {
    let mut f: Vec<Field> = Vec::new();
    f.push(Field {
        key: "sim.scenario".into(),
        get: Box::new(|c| c.scenario.to_string()),
        set: Box::new(|c, v| {
            c.scenario = ScenarioSelection::parse(v)?;
            Ok(())
        }),
    });
    int_field!(f, "sim.max_rounds", |c| c.max_rounds);
    float_field!(f, "sim.round_duration_s", |c| c.round_duration_s);
    int_field!(f, "sim.seed", |c| c.seed);
    int_field!(f, "sim.runs", |c| c.runs);
    f.push(Field {
        key: "sim.noise".into(),
        get: Box::new(|c| switch(c.noise)),
        set: Box::new(|c, v| {
            c.noise = parse_switch(v)?;
            Ok(())
        }),
    });
    f.push(Field {
        key: "sim.transmit_rule".into(),
        get: Box::new(|c| c.transmit_rule.clone()),
        set: Box::new(|c, v| match v {
            "level" | "hard_soft" | "periodic" => {
                c.transmit_rule = v.to_string();
                Ok(())
            }
            _ => Err(format!("expected level, hard_soft or periodic, got `{v}`")),
        }),
    });
    int_field!(f, "sim.periodic_interval", |c| c.periodic_interval);

    float_field!(f, "radio.e_tx_elec_nj", |c| c.radio.e_tx_elec_nj);
    float_field!(f, "radio.e_rx_elec_nj", |c| c.radio.e_rx_elec_nj);
    float_field!(f, "radio.e_amp_nj", |c| c.radio.e_amp_nj);
    float_field!(f, "radio.path_loss_exponent", |c| c.radio.path_loss_exponent);

    float_field!(f, "fatigue.initial_energy_j", |c| c.fatigue.initial_energy);
    float_field!(f, "fatigue.threshold_j", |c| c.fatigue.fatigue_threshold);

    float_field!(f, "body.weight_kg", |c| c.body.weight_kg);
    float_field!(f, "body.height_cm", |c| c.body.height_cm);
    float_field!(f, "body.age_years", |c| c.body.age_years);

    float_field!(f, "baseline.temperature", |c| c.baseline.temperature);
    float_field!(f, "baseline.heart_rate", |c| c.baseline.heart_rate);
    float_field!(f, "baseline.glucose", |c| c.baseline.glucose);
    float_field!(f, "baseline.glucose_floor", |c| c.baseline.glucose_floor);

    for s in Scenario::ALL {
        let i = s.index();
        let p = |name: &str| format!("scenario.{}.{name}", s.name());
        float_field!(f, p("speed_mph"), |c| c.scenarios[i].speed_mph);
        float_field!(f, p("drain_rate"), |c| c.scenarios[i].drain_rate);
        float_field!(f, p("temp_plateau"), |c| c.scenarios[i].temp_plateau);
        float_field!(f, p("temp_time_constant"), |c| c.scenarios[i].temp_time_constant);
        float_field!(f, p("hr_plateau"), |c| c.scenarios[i].hr_plateau);
        float_field!(f, p("hr_time_constant"), |c| c.scenarios[i].hr_time_constant);
        float_field!(f, p("glucose_slope"), |c| c.scenarios[i].glucose_slope);
        float_field!(f, p("noise.temperature"), |c| c.scenarios[i].noise.temperature);
        float_field!(f, p("noise.heart_rate"), |c| c.scenarios[i].noise.heart_rate);
        float_field!(f, p("noise.glucose"), |c| c.scenarios[i].noise.glucose);
    }

    for k in SensorKind::ALL {
        let i = k.index();
        let p = |name: &str| format!("node.{}.{name}", k.name());
        float_field!(f, p("initial_energy_j"), |c| c.nodes[i].initial_energy);
        int_field!(f, p("payload_bits"), |c| c.nodes[i].payload_bits);
        float_field!(f, p("distance_m"), |c| c.nodes[i].distance_m);
        f.push(Field {
            key: p("path_loss_exponent"),
            get: Box::new(move |c| match c.nodes[i].path_loss_exponent {
                Some(n) => format!("{n}"),
                None => "none".into(),
            }),
            set: Box::new(move |c, v| {
                c.nodes[i].path_loss_exponent = if v == "none" { None } else { Some(parse_f64(v)?) };
                Ok(())
            }),
        });
        float_field!(f, p("hard_threshold"), |c| c.nodes[i].hard_threshold);
        float_field!(f, p("soft_threshold"), |c| c.nodes[i].soft_threshold);
        f.push(Field {
            key: p("direction"),
            get: Box::new(move |c| c.nodes[i].direction.to_string()),
            set: Box::new(move |c, v| {
                c.nodes[i].direction = v.parse::<Direction>()?;
                Ok(())
            }),
        });
        int_field!(f, p("sample_interval"), |c| c.nodes[i].sample_interval);
    }
    f
}

impl Config {
    /// Apply `key = value` lines on top of the defaults. Every problem found
    /// is returned; keys that parsed cleanly are still applied.
    pub fn from_text(text: &str) -> (Config, Vec<Violation>) {
        let mut cfg = Config::default();
        let mut problems = Vec::new();
        let table = fields();
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(Violation::new(format!("line {line_no}"), "expected `key = value`"));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                problems.push(Violation::new(key, format!("duplicate key (line {line_no}, first on line {first})")));
                continue;
            }
            seen.push((key.to_string(), line_no));
            match table.iter().find(|f| f.key == key) {
                Some(field) => {
                    if let Err(e) = (field.set)(&mut cfg, value) {
                        problems.push(Violation::new(key, format!("line {line_no}: {e}")));
                    }
                }
                None => problems.push(Violation::new(key, format!("line {line_no}: unknown key"))),
            }
        }
        (cfg, problems)
    }

    /// Read, parse and validate a config file.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let (cfg, mut problems) = Config::from_text(&text);
        problems.extend(cfg.violations());
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    /// Every key with its current value, one per line, in canonical order.
    /// Parsing this text reproduces the config exactly.
    pub fn to_text(&self) -> String {
        fields().iter().map(|f| format!("{} = {}\n", f.key, (f.get)(self))).collect()
    }

    pub fn transmit_rule(&self) -> Option<TransmitRule> {
        match self.transmit_rule.as_str() {
            "level" => Some(TransmitRule::Level),
            "hard_soft" => Some(TransmitRule::HardSoft),
            "periodic" => Some(TransmitRule::Periodic { interval: self.periodic_interval }),
            _ => None,
        }
    }

    pub fn scenario_params(&self, scenario: Scenario) -> &ScenarioParams {
        &self.scenarios[scenario.index()]
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.max_rounds == 0 {
            out.push(Violation::new("sim.max_rounds", "max_rounds must be > 0"));
        }
        if self.runs == 0 {
            out.push(Violation::new("sim.runs", "runs must be >= 1"));
        }
        if self.round_duration_s != 1.0 {
            out.push(Violation::new(
                "sim.round_duration_s",
                format!("round duration is fixed at 1 s, got {}", self.round_duration_s),
            ));
        }
        if self.transmit_rule().is_none() {
            out.push(Violation::new("sim.transmit_rule", format!("unknown rule `{}`", self.transmit_rule)));
        }
        if self.transmit_rule == "periodic" && self.periodic_interval == 0 {
            out.push(Violation::new("sim.periodic_interval", "periodic interval must be >= 1"));
        }
        for mut v in self.radio.to_params().violations("radio") {
            if !v.field.ends_with("path_loss_exponent") {
                v.field.push_str("_nj");
            }
            out.push(v);
        }
        out.extend(self.fatigue.violations("fatigue"));
        out.extend(self.body.violations("body"));
        out.extend(self.baseline.violations("baseline"));
        for s in &self.scenarios {
            out.extend(s.violations(&format!("scenario.{}", s.scenario.name())));
        }
        let [w, s, f] = &self.scenarios;
        let ordered = |get: fn(&ScenarioParams) -> f64| get(w) <= get(s) && get(s) <= get(f);
        if !ordered(|p| p.temp_plateau) {
            out.push(Violation::new(
                "scenario.*.temp_plateau",
                "temperature plateaus must be ordered walking <= slow_running <= fast_running",
            ));
        }
        if !ordered(|p| p.hr_plateau) {
            out.push(Violation::new(
                "scenario.*.hr_plateau",
                "heart-rate plateaus must be ordered walking <= slow_running <= fast_running",
            ));
        }
        if !ordered(|p| p.glucose_slope.abs()) {
            out.push(Violation::new(
                "scenario.*.glucose_slope",
                "glucose must fall at least as fast for faster scenarios",
            ));
        }
        for n in &self.nodes {
            out.extend(n.violations(&format!("node.{}", n.kind.name())));
        }
        out
    }

    /// Run configuration for a single scenario.
    pub fn sim_config(&self, scenario: Scenario) -> SimConfig {
        SimConfig {
            scenario: *self.scenario_params(scenario),
            radio: self.radio.to_params(),
            nodes: self.nodes.to_vec(),
            rule: self.transmit_rule().unwrap_or(TransmitRule::Level),
            fatigue: self.fatigue,
            baseline: self.baseline,
            max_rounds: self.max_rounds,
            round_duration_s: self.round_duration_s,
            seed: self.seed,
            runs: self.runs,
            noise: self.noise,
            ci_level: 0.90,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_are_clean() {
        assert_eq!(Config::default().violations(), vec![]);
    }

    #[test]
    fn text_round_trips() {
        let cfg = Config::default();
        let (back, problems) = Config::from_text(&cfg.to_text());
        assert!(problems.is_empty(), "{problems:?}");
        assert_eq!(back, cfg);
    }

    #[test]
    fn ratio_values() {
        let (cfg, problems) = Config::from_text("scenario.walking.drain_rate = 1000/10182\n");
        assert!(problems.is_empty());
        assert_eq!(cfg.scenarios[0].drain_rate, 1000.0 / 10182.0);
        assert!(parse_f64("1/0").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n  sim.seed = 9   # trailing\n";
        let (cfg, problems) = Config::from_text(text);
        assert!(problems.is_empty());
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn reports_every_problem() {
        let text = "sim.seed = x\nbogus.key = 1\nno equals sign\nsim.runs = 3\nsim.runs = 4\n";
        let (cfg, problems) = Config::from_text(text);
        let fields: Vec<_> = problems.iter().map(|v| v.field.as_str()).collect();
        assert_eq!(fields, ["sim.seed", "bogus.key", "line 3", "sim.runs"]);
        assert_eq!(cfg.runs, 3);
    }

    #[test]
    fn fatigue_threshold_above_initial() {
        let (cfg, _) = Config::from_text("fatigue.threshold_j = 3000\n");
        let v = cfg.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "fatigue.threshold_j");
        assert!(v[0].rule.contains("fatigue_threshold"));
    }

    #[test]
    fn negative_amplifier_coefficient() {
        let (cfg, _) = Config::from_text("radio.e_amp_nj = -1.97\n");
        let v = cfg.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "radio.e_amp_nj");
        assert!(v[0].rule.starts_with("RadioParams"), "{}", v[0].rule);
        assert!(v[0].rule.contains("strictly positive"));
    }

    #[test]
    fn node_and_scenario_rules() {
        let text = "node.glucose.sample_interval = 0\nscenario.fast_running.glucose_slope = 0.1\n\
                    scenario.walking.hr_plateau = 200\nscenario.slow_running.glucose_slope = -0.5\nnode.heartbeat.path_loss_exponent = 9\n";
        let (cfg, problems) = Config::from_text(text);
        assert!(problems.is_empty());
        let fields: Vec<_> = cfg.violations().into_iter().map(|v| v.field).collect();
        for expected in [
            "node.glucose.sample_interval",
            "scenario.fast_running.glucose_slope",
            "scenario.*.hr_plateau",
            "scenario.*.glucose_slope",
            "node.heartbeat.path_loss_exponent",
        ] {
            assert!(fields.iter().any(|f| f == expected), "missing {expected} in {fields:?}");
        }
    }

    #[test]
    fn optional_exponent_override() {
        let (cfg, problems) = Config::from_text("node.heartbeat.path_loss_exponent = 5.9\n");
        assert!(problems.is_empty());
        assert_eq!(cfg.nodes[SensorKind::Heartbeat.index()].path_loss_exponent, Some(5.9));
        let (cfg, _) = Config::from_text(&cfg.to_text());
        assert_eq!(cfg.nodes[SensorKind::Heartbeat.index()].path_loss_exponent, Some(5.9));
    }

    #[test]
    fn nanojoule_inputs_become_joules() {
        let radio = Config::default().sim_config(Scenario::Walking).radio;
        assert_eq!(radio, RadioParams::default());
    }

    proptest! {
        #[test]
        fn arbitrary_floats_round_trip(x in proptest::num::f64::NORMAL, seed in any::<u64>()) {
            let mut cfg = Config::default();
            cfg.scenarios[1].drain_rate = x;
            cfg.seed = seed;
            let (back, problems) = Config::from_text(&cfg.to_text());
            prop_assert!(problems.is_empty());
            prop_assert_eq!(back.scenarios[1].drain_rate.to_bits(), x.to_bits());
            prop_assert_eq!(back.seed, seed);
        }
    }
}
