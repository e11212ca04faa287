//! Exit criteria. Each test prints one `ACCEPT [PASS|FAIL]` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them.

mod common;

use std::time::{Duration, Instant};

use common::{explicit_projection_error, random_orthonormal, random_unitary};
use rand::Rng;
use subtrace::harness::{run_arm, run_comparison, run_trial_with, ExperimentSpec};
use subtrace::metrics::projection_error;
use subtrace::model::{draw_snapshot, generate_true_bases, ScenarioConfig};
use subtrace::numkit::{complete_basis, span_distance};
use subtrace::rng::{gaussian_matrix, gaussian_vector, stream, Purpose};
use subtrace::tracker::{update, TrackerState};
use subtrace::{selfcheck, AlgoClass, CMatrix, ClampPolicy, Mode, TrackerConfig};

fn report(name: &str, passed: bool, detail: impl std::fmt::Display) {
    println!("ACCEPT [{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{name}: {detail}");
}

const COMBOS: [(AlgoClass, Mode); 4] = [
    (AlgoClass::Dpm, Mode::Signal),
    (AlgoClass::Dpm, Mode::Noise),
    (AlgoClass::Oja, Mode::Signal),
    (AlgoClass::Oja, Mode::Noise),
];

#[test]
fn geometry_suite() {
    let start = Instant::now();
    let results = selfcheck::run_all(10_000, 0x6e0).unwrap();
    let elapsed = start.elapsed();
    for r in &results {
        println!("    {r}");
    }
    let all = results.iter().all(|r| r.passed && r.instances >= 10_000);
    report(
        "geometry suite (10^4 instances per invariant, < 30 s)",
        all && elapsed < Duration::from_secs(30),
        format!("{} checks, {:.2?}", results.len(), elapsed),
    );
}

#[test]
fn orthonormality_over_full_run() {
    let spec = ExperimentSpec::reference();
    let break_step = spec.scenario.break_step.unwrap() as u64;
    let mut worst: f64 = 0.0;
    for (class, mode) in COMBOS {
        for policy in [ClampPolicy::Off, ClampPolicy::Generic] {
            let cfg = TrackerConfig::new(class, mode, 0.08, policy);
            let run = run_trial_with(&spec, &cfg, 0).unwrap();
            assert_eq!(run.len(), 6000);
            for s in run.iter().filter(|s| s.step != break_step) {
                worst = worst.max(s.eta);
            }
        }
    }
    report(
        "orthonormality eta <= 1e-20 at every non-break step, 4 class x mode",
        worst <= 1e-20,
        format!("worst eta {worst:.3e}"),
    );
}

#[test]
fn rotated_basis_oracle() {
    // Built here from scratch: (h, COM) with h = y/‖y‖ ± β‖q‖d.
    let mut rng = stream(0xe12, 0, Purpose::Scratch);
    let mut worst = [0.0_f64; 2];
    let mut counts = [0usize; 2];
    for (slot, class) in [AlgoClass::Dpm, AlgoClass::Oja].into_iter().enumerate() {
        while counts[slot] < 1000 {
            let n = rng.random_range(2..=12);
            let l = rng.random_range(1..n);
            let w = random_orthonormal(&mut rng, n, l);
            let var = rng.random_range(0.01..100.0);
            let x = gaussian_vector(&mut rng, n, var);
            let mode = if rng.random_bool(0.5) {
                Mode::Signal
            } else {
                Mode::Noise
            };
            let cfg = TrackerConfig::new(class, mode, rng.random_range(0.001..0.5), ClampPolicy::Generic);
            let state = TrackerState {
                basis: w.clone(),
                step: 0,
            };
            let (_, rec) = update(&state, &cfg, &x).unwrap();
            if rec.skipped() {
                continue;
            }
            let frame = complete_basis(&w, &rec.y).unwrap();
            let d = match class {
                AlgoClass::Dpm => x.clone(),
                AlgoClass::Oja => x.sub(&rec.y),
            };
            let sign = if mode == Mode::Signal { 1.0 } else { -1.0 };
            let h = frame.column(0).add(&d.scale_real(sign * rec.beta_eff * rec.q.norm()));
            let mut cols = frame.columns();
            cols[0] = h;
            let hc = CMatrix::from_columns(&cols).unwrap();
            worst[slot] = worst[slot].max(span_distance(&rec.t_pre, &hc).unwrap());
            counts[slot] += 1;
        }
    }
    report(
        "span(T) == span(h, COM) <= 1e-14 on 10^3 instances per class",
        worst[0] <= 1e-14 && worst[1] <= 1e-14,
        format!("worst DPM {:.3e}, OJA {:.3e}", worst[0], worst[1]),
    );
}

#[test]
fn metrics_oracle() {
    let mut rng = stream(0x3e7, 0, Purpose::Scratch);
    let (mut worst_fast, mut worst_rot) = (0.0_f64, 0.0_f64);
    for i in 0..1000 {
        let tb = generate_true_bases(&ScenarioConfig::reference(), &mut rng).unwrap();
        let mode = if i % 2 == 0 { Mode::Signal } else { Mode::Noise };
        let w = if i % 3 == 0 {
            gaussian_matrix(&mut rng, 8, 4, 0.5)
        } else {
            random_orthonormal(&mut rng, 8, 4)
        };
        let fast = projection_error(&w, &tb, mode).unwrap();
        worst_fast = worst_fast.max((fast - explicit_projection_error(&w, &tb, mode)).abs());
        let wo = random_orthonormal(&mut rng, 8, 4);
        let q = random_unitary(&mut rng, 4);
        let a = projection_error(&wo, &tb, mode).unwrap();
        let b = projection_error(&wo.matmul(&q).unwrap(), &tb, mode).unwrap();
        worst_rot = worst_rot.max((a - b).abs());
    }
    report(
        "projection error fast path vs explicit projectors, rotation invariance <= 1e-10",
        worst_fast <= 1e-10 && worst_rot <= 1e-10,
        format!("worst fast-vs-explicit {worst_fast:.3e}, rotation {worst_rot:.3e}"),
    );
}

#[test]
fn reference_reproduction() {
    let spec = ExperimentSpec::reference();
    assert_eq!(
        spec.tracker,
        TrackerConfig::new(AlgoClass::Oja, Mode::Noise, 0.08, ClampPolicy::Generic)
    );
    assert_eq!(
        (spec.n_runs, spec.scenario.n_steps, spec.scenario.break_step),
        (100, 6000, Some(3000))
    );
    let start = Instant::now();
    let report_data = run_comparison(&spec).unwrap();
    let elapsed = start.elapsed();

    let (o, a) = (&report_data.series_original, &report_data.series_amended);
    println!(
        "    sparks original={} amended={}, steady state original={:.2} dB amended={:.2} dB, {:.2?}",
        report_data.sparks_original.len(),
        report_data.sparks_amended.len(),
        report_data.steady_state_db.original,
        report_data.steady_state_db.amended,
        elapsed
    );

    let post: Vec<usize> = (0..o.len()).filter(|&k| o.steps[k] > spec.burn_in as u64).collect();
    let dominated = post.iter().filter(|&&k| a.ep_max[k] <= o.ep_max[k]).count();
    let frac = dominated as f64 / post.len() as f64;

    let reconv = |s: &subtrace::AggregateSeries| {
        let before = s.mean_ep_db(2000, 2999);
        let after = s.mean_ep_db(5000, 5999);
        (before, after, (after - before).abs() <= 3.0)
    };
    let (ob, oa, ook) = reconv(o);
    let (ab, aa, aok) = reconv(a);

    let a_ok = report_data.sparks_amended.is_empty();
    let b_ok = !report_data.sparks_original.is_empty();
    let c_ok = frac >= 0.95;
    let mut all = true;
    for (name, ok, detail) in [
        (
            "(a) limited arm has zero sparks",
            a_ok,
            format!("{} sparks", report_data.sparks_amended.len()),
        ),
        (
            "(b) fixed-stepsize arm has at least one spark",
            b_ok,
            format!("{} sparks", report_data.sparks_original.len()),
        ),
        (
            "(c) limited ep_max <= fixed ep_max on >= 95% of post-burn-in steps",
            c_ok,
            format!("{:.2}%", 100.0 * frac),
        ),
        (
            "(d) both arms re-converge within 3 dB",
            ook && aok,
            format!("fixed {ob:.2} -> {oa:.2} dB, limited {ab:.2} -> {aa:.2} dB"),
        ),
        (
            "runtime < 60 s",
            elapsed < Duration::from_secs(60),
            format!("{elapsed:.2?}"),
        ),
    ] {
        println!(
            "ACCEPT [{}] reference reproduction {name}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        all &= ok;
    }
    assert!(all);
}

#[test]
fn dpm_signal_null_effect() {
    let mut spec = ExperimentSpec::reference();
    spec.tracker = TrackerConfig::new(AlgoClass::Dpm, Mode::Signal, 0.08, ClampPolicy::ClassSpecific);
    spec.n_runs = 10;
    let runs = run_arm(&spec, &spec.tracker).unwrap();
    let all_nominal = runs.iter().flatten().all(|s| s.beta_eff == 0.08 && !s.skipped);
    let cmp = run_comparison(&spec).unwrap();
    let identical = cmp.series_original == cmp.series_amended
        && cmp.sparks_original == cmp.sparks_amended
        && cmp.steady_state_db.original.to_bits() == cmp.steady_state_db.amended.to_bits();
    report(
        "DPM/signal class-specific limiter never binds; comparison bitwise identical",
        all_nominal && identical,
        format!("beta_eff == beta at every step: {all_nominal}, identical: {identical}"),
    );
}

#[test]
fn model_statistics() {
    let cfg = ScenarioConfig::reference();
    let tb = generate_true_bases(&cfg, &mut stream(0x51a7, 0, Purpose::Truth)).unwrap();
    let mut rng = stream(0x51a7, 0, Purpose::Snapshots);
    let draws = 100_000;
    let mut power = 0.0;
    let mut sources = [0.0; 4];
    for _ in 0..draws {
        let d = draw_snapshot(&tb, &cfg, &mut rng);
        power += d.x.norm_sqr();
        for (acc, s) in sources.iter_mut().zip(&d.sources) {
            *acc += s.norm_sqr();
        }
    }
    let power = power / draws as f64;
    let stated = 11.108;
    let exact: f64 = cfg.signal_powers.iter().sum::<f64>() + 8.0 * cfg.noise_variance;
    let power_ok = (power - stated).abs() <= 0.05 * stated && (power - exact).abs() <= 0.05 * exact;
    let rel: Vec<f64> = sources
        .iter()
        .zip(&cfg.signal_powers)
        .map(|(s, p)| (s / draws as f64 - p).abs() / p)
        .collect();
    let src_ok = rel.iter().all(|r| *r <= 0.05);
    report(
        "E||x||^2 within 5% of 11.108 (and of 11.208); per-source power within 5%",
        power_ok && src_ok,
        format!(
            "E||x||^2 = {power:.4}, worst source deviation {:.2}%",
            100.0 * rel.iter().cloned().fold(0.0, f64::max)
        ),
    );
}
