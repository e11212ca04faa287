//! Monte-Carlo checks of the snapshot model, break perturbation and
//! initial-basis statistics.

mod common;

use subtrace::metrics::{orthonormality_error, projection_error, residual_power};
use subtrace::model::{draw_snapshot, generate_true_bases, perturb_basis, snapshot, ScenarioConfig};
use subtrace::rng::{stream, Purpose};
use subtrace::tracker::init_tracker;
use subtrace::{CMatrix, Mode};

#[test]
fn snapshot_power_and_residual() {
    let cfg = ScenarioConfig::reference();
    let tb = generate_true_bases(&cfg, &mut stream(1, 0, Purpose::Truth)).unwrap();
    let mut rng = stream(1, 0, Purpose::Snapshots);
    let draws = 100_000;
    let (mut power, mut resid) = (0.0, 0.0);
    let mut source_power = [0.0; 4];
    for _ in 0..draws {
        let d = draw_snapshot(&tb, &cfg, &mut rng);
        power += d.x.norm_sqr();
        resid += residual_power(&tb.signal_basis, &d.x).unwrap();
        for (acc, s) in source_power.iter_mut().zip(&d.sources) {
            *acc += s.norm_sqr();
        }
    }
    let power = power / draws as f64;
    let resid = resid / draws as f64;
    // Σ powers + N·σ² = 11.2 + 0.008
    let expected_power: f64 = cfg.signal_powers.iter().sum::<f64>() + 8.0 * cfg.noise_variance;
    assert!((expected_power - 11.208).abs() < 1e-12);
    assert!((power - expected_power).abs() < 0.5, "{power}");
    // (N − L)·σ²
    assert!((resid - 0.004).abs() < 0.2 * 0.004, "{resid}");
    for (got, want) in source_power.iter().zip(&cfg.signal_powers) {
        let got = got / draws as f64;
        assert!((got - want).abs() < 0.05 * want, "{got} vs {want}");
    }
}

#[test]
fn noiseless_snapshots_stay_in_signal_subspace() {
    let cfg = ScenarioConfig {
        noise_variance: 0.0,
        ..ScenarioConfig::reference()
    };
    let tb = generate_true_bases(&cfg, &mut stream(2, 0, Purpose::Truth)).unwrap();
    let mut rng = stream(2, 0, Purpose::Snapshots);
    for _ in 0..2000 {
        let x = snapshot(&tb, &cfg, &mut rng);
        assert!(residual_power(&tb.signal_basis, &x).unwrap().sqrt() <= 1e-10 * x.norm());
    }
}

#[test]
fn snapshot_streams_are_deterministic() {
    let cfg = ScenarioConfig::reference();
    let tb = generate_true_bases(&cfg, &mut stream(4, 9, Purpose::Truth)).unwrap();
    let mut a = stream(4, 9, Purpose::Snapshots);
    let mut b = stream(4, 9, Purpose::Snapshots);
    for _ in 0..100 {
        assert_eq!(snapshot(&tb, &cfg, &mut a), snapshot(&tb, &cfg, &mut b));
    }
}

#[test]
fn break_perturbation_energy() {
    let w = CMatrix::eye_columns(8, 4);
    let mut rng = stream(6, 0, Purpose::Break);
    let draws = 10_000;
    let mut energy = 0.0;
    let mut large_eta = 0;
    for _ in 0..draws {
        let p = perturb_basis(&w, 0.1, &mut rng);
        energy += p.sub(&w).unwrap().frobenius_norm_sqr();
        if orthonormality_error(&p) > 0.01 {
            large_eta += 1;
        }
    }
    let energy = energy / draws as f64;
    assert!((energy - 3.2).abs() < 0.32, "{energy}");
    assert!(large_eta as f64 / draws as f64 > 0.99);
}

#[test]
fn random_initial_error() {
    // E[e_p] = 2L(1 − L/N) for independent random subspaces.
    let cfg = ScenarioConfig::reference();
    let mut rng = stream(7, 0, Purpose::Scratch);
    let draws = 1000;
    let mut total = 0.0;
    for _ in 0..draws {
        let tb = generate_true_bases(&cfg, &mut rng).unwrap();
        let st = init_tracker(8, 4, &mut rng).unwrap();
        assert!(orthonormality_error(&st.basis) <= 1e-20);
        total += projection_error(&st.basis, &tb, Mode::Signal).unwrap();
    }
    let mean = total / draws as f64;
    assert!((mean - 4.0).abs() < 0.5, "{mean}");
}
