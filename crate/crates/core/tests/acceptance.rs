//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config as PropConfig, TestRng, TestRunner};
use statrs::distribution::{ContinuousCDF, StudentsT};

use wbasn_sim::metrics::Observed;
use wbasn_sim::{
    bmr, confidence_interval, receive_energy, run_simulation, transmit_energy, BodyProfile, RadioParams, Scenario,
    SimConfig, Simulation, TransmitRule,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Transmission cost straight from the radio model with the default
/// coefficients, bypassing the library's parameter plumbing.
fn oracle_tx_cost(bits: f64, distance: f64, exponent: f64) -> f64 {
    16.7e-9 * bits + 1.97e-9 * bits * distance.powf(exponent)
}

fn ac1_fatigue_rounds() -> Outcome {
    let expected = [(Scenario::Walking, 10182), (Scenario::SlowRunning, 6454), (Scenario::FastRunning, 3811)];
    let mut notes = Vec::new();
    for (scenario, round) in expected {
        let cfg = SimConfig::defaults(scenario);
        let start = Instant::now();
        let result = run_simulation(&cfg, cfg.seed).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        check(result.summary.fatigue_round == Observed::At(round), || {
            format!("{scenario}: fatigue {:?}, expected {round}", result.summary.fatigue_round)
        })?;
        check(elapsed < Duration::from_secs(5), || format!("{scenario}: took {elapsed:?}"))?;
        notes.push(format!("{scenario}={round} ({:.0} ms)", elapsed.as_secs_f64() * 1e3));
    }
    Ok(notes.join(", "))
}

fn ac2_radio_golden() -> Outcome {
    let p = RadioParams::default();
    let tx = transmit_energy(&p, 240, 1.0).map_err(|e| e.to_string())?;
    let rx = receive_energy(&p, 2400);
    check(rel_err(tx, 4.4808e-6) <= 1e-12, || format!("tx {tx:e}"))?;
    check(rel_err(rx, 86.64e-6) <= 1e-12, || format!("rx {rx:e}"))?;
    Ok(format!("tx(240 b, 1 m) = {tx:e} J, rx(2400 b) = {rx:e} J"))
}

fn ac3_bmr_golden() -> Outcome {
    let v = bmr(&BodyProfile { weight_kg: 70.0, height_cm: 175.0, age_years: 25.0 });
    check((v - 1735.15).abs() <= 1e-9, || format!("bmr {v}"))?;
    Ok(format!("bmr = {v}"))
}

fn ac4_energy_conservation() -> Outcome {
    let mut checked = 0u64;
    for scenario in Scenario::ALL {
        let cfg = SimConfig::defaults(scenario);
        let costs: Vec<f64> = cfg
            .nodes
            .iter()
            .map(|n| oracle_tx_cost(n.payload_bits as f64, n.distance_m, cfg.radio.path_loss_exponent))
            .collect();
        let total: f64 = cfg.nodes.iter().map(|n| n.initial_energy).sum();
        check((total - 0.9).abs() < 1e-15, || format!("initial energy {total}"))?;
        let mut sim = Simulation::new(&cfg, cfg.seed).map_err(|e| e.to_string())?;
        while !sim.is_finished() {
            let rec = sim.run_round();
            let spent: f64 = sim.nodes().iter().zip(&costs).map(|(n, c)| n.tx_count() as f64 * c).sum();
            let accounted = rec.residual_energy + spent;
            check(rel_err(accounted, 0.9) <= 1e-9, || {
                format!("{scenario} round {}: residual {} + spent {spent} != 0.9", rec.round, rec.residual_energy)
            })?;
            checked += 1;
        }
        let last = sim.records().last().copied().ok_or("no records")?;
        check(last.alive == 0, || format!("{scenario}: nodes still alive at the end"))?;
    }
    Ok(format!("{checked} round records checked"))
}

fn ac5_orderings() -> Outcome {
    let mut first = Vec::new();
    let mut last = Vec::new();
    let mut throughput = Vec::new();
    let mut fatigue = Vec::new();
    for scenario in Scenario::ALL {
        let cfg = SimConfig::defaults(scenario);
        let r = run_simulation(&cfg, cfg.seed).map_err(|e| e.to_string())?;
        let observed = |o: Observed, what: &str| o.round().ok_or(format!("{scenario}: {what} censored"));
        first.push(observed(r.summary.first_node_dead, "first death")?);
        last.push(observed(r.summary.last_node_dead, "last death")?);
        fatigue.push(observed(r.summary.fatigue_round, "fatigue")?);
        throughput.push(r.summary.throughput);
    }
    let strictly_falling = |v: &[u64]| v[0] > v[1] && v[1] > v[2];
    check(strictly_falling(&first), || format!("first dead {first:?}"))?;
    check(strictly_falling(&last), || format!("last dead {last:?}"))?;
    check(strictly_falling(&fatigue), || format!("fatigue {fatigue:?}"))?;
    check(throughput[2] >= throughput[1] && throughput[1] >= throughput[0], || format!("throughput {throughput:?}"))?;
    Ok(format!("first {first:?}, last {last:?}, fatigue {fatigue:?}, throughput {throughput:?}"))
}

fn ac6_closed_form_lifetime() -> Outcome {
    let interval = 3u64;
    let mut notes = Vec::new();
    for scenario in Scenario::ALL {
        let mut cfg = SimConfig::defaults(scenario);
        cfg.rule = TransmitRule::Periodic { interval };
        cfg.max_rounds = 300_000;
        let r = run_simulation(&cfg, cfg.seed).map_err(|e| e.to_string())?;
        for (params, outcome) in cfg.nodes.iter().zip(&r.nodes) {
            let cost = oracle_tx_cost(params.payload_bits as f64, params.distance_m, 3.38);
            let expected = interval * (0.3 / cost).floor() as u64;
            check(outcome.death_round == Some(expected), || {
                format!("{scenario} {}: died {:?}, expected {expected}", params.kind, outcome.death_round)
            })?;
            if scenario == Scenario::Walking {
                notes.push(format!("{}={expected}", params.kind));
            }
        }
    }
    Ok(format!("interval {interval}: {}", notes.join(", ")))
}

fn read_bundle(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.map(|e| e.path()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            std::fs::read(&p).map(|b| (name, b)).map_err(|e| e.to_string())
        })
        .collect()
}

fn ac7_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bundles = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_wbasn-sim"))
            .args(["run", "--scenario", "all", "--seed", "42", "--runs", "5", "--rounds", "20000", "--noise", "on"])
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        bundles.push(read_bundle(&out)?);
    }
    check(bundles[0].len() == 14, || format!("{} files", bundles[0].len()))?;
    check(bundles[0] == bundles[1], || "bundles differ".into())?;
    let bytes: usize = bundles[0].iter().map(|(_, b)| b.len()).sum();
    Ok(format!("{} files, {bytes} bytes identical", bundles[0].len()))
}

fn ac8_ci_oracle() -> Outcome {
    let values = [10.0, 12.0, 14.0, 16.0, 18.0];
    let ci = confidence_interval(&values, 0.90).map_err(|e| e.to_string())?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| e.to_string())?.inverse_cdf(0.95);
    let oracle = t * sd / n.sqrt();
    check(ci.mean == 14.0, || format!("mean {}", ci.mean))?;
    check((ci.half_width - oracle).abs() <= 1e-3, || format!("half width {} vs {oracle}", ci.half_width))?;
    check((oracle - 3.015).abs() <= 1e-3, || format!("oracle {oracle}"))?;
    Ok(format!("mean {}, half width {:.6} (oracle {oracle:.6})", ci.mean, ci.half_width))
}

fn ac9_monotone_series() -> Outcome {
    let strategy = (0usize..3, proptest::num::u64::ANY, 1u64..=20_000, 0usize..3, 0.5f64..3.0);
    let mut runner = TestRunner::new_with_rng(PropConfig::default(), TestRng::deterministic_rng(Default::default()));
    let mut total_rounds = 0u64;
    for case in 0..100 {
        let (idx, seed, rounds, rule, noise_scale) =
            strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let mut cfg = SimConfig::defaults(Scenario::ALL[idx]);
        cfg.noise = true;
        cfg.max_rounds = rounds;
        cfg.scenario.noise.temperature *= noise_scale;
        cfg.scenario.noise.heart_rate *= noise_scale;
        cfg.scenario.noise.glucose *= noise_scale;
        cfg.rule = [TransmitRule::Level, TransmitRule::HardSoft, TransmitRule::Periodic { interval: 2 }][rule];
        let r = run_simulation(&cfg, seed).map_err(|e| e.to_string())?;
        check(r.records.len() as u64 <= 20_000, || format!("case {case}: {} rounds", r.records.len()))?;
        for w in r.records.windows(2) {
            let (a, b) = (w[0], w[1]);
            check(b.round == a.round + 1, || format!("case {case}: round gap"))?;
            check(b.alive <= a.alive, || format!("case {case} round {}: alive rose", b.round))?;
            check(b.packets >= a.packets, || format!("case {case} round {}: packets fell", b.round))?;
            check(b.soldier_energy <= a.soldier_energy, || {
                format!("case {case} round {}: soldier energy rose", b.round)
            })?;
        }
        total_rounds += r.records.len() as u64;
    }
    Ok(format!("100 configs, {total_rounds} rounds"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1 fatigue rounds 10182/6454/3811", ac1_fatigue_rounds),
        ("AC2 radio golden values", ac2_radio_golden),
        ("AC3 BMR golden value", ac3_bmr_golden),
        ("AC4 node energy conservation", ac4_energy_conservation),
        ("AC5 lifetime, fatigue and throughput orderings", ac5_orderings),
        ("AC6 closed-form lifetime under periodic transmission", ac6_closed_form_lifetime),
        ("AC7 byte-identical output bundles", ac7_determinism),
        ("AC8 confidence interval oracle", ac8_ci_oracle),
        ("AC9 monotone series over randomized configs", ac9_monotone_series),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
