//! Randomized geometric checks of the tracker update.
//!
//! Each check draws random bases and snapshots, runs the real update and
//! compares what it produced with the plane geometry it should obey. The
//! CLI exposes these as `geometry --selfcheck`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::error::Result;
use crate::numkit::{complete_basis, hermitian_apply, span_distance, vector_angle, CVector};
use crate::rng::{gaussian_vector, stream, Purpose, StreamRng};
use crate::tracker::{
    companion_t, gamma_angle, init_tracker, rotated_update_basis, rotated_vector, update, AlgoClass, ClampPolicy, Mode,
    StepRecord, TrackerConfig, TrackerState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// Randomized instances actually evaluated.
    pub instances: usize,
    /// Largest observed violation metric, on the same scale as `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:<24} instances={:<6} worst={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.worst,
            self.tolerance
        )
    }
}

struct Instance {
    state: TrackerState,
    x: CVector,
}

fn log_uniform(rng: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// `N ∈ [2, 16]`, `L < N`, and a snapshot mixing an in-span and an
/// arbitrary part at independent random scales, so `∠(x, y)` covers
/// `(0, π/2)` including both ends.
fn draw_instance(rng: &mut StreamRng) -> Result<Instance> {
    let n = rng.random_range(2..=16);
    let l = rng.random_range(1..n);
    let state = init_tracker(n, l, rng)?;
    let inner = state.basis.apply(&gaussian_vector(rng, l, 1.0))?;
    let outer = gaussian_vector(rng, n, 1.0);
    let x = inner
        .scale_real(log_uniform(rng, 1e-2, 1e2))
        .add(&outer.scale_real(log_uniform(rng, 1e-2, 1e2)));
    Ok(Instance { state, x })
}

fn random_config(rng: &mut StreamRng, policy: ClampPolicy) -> TrackerConfig {
    let class = if rng.random_bool(0.5) {
        AlgoClass::Dpm
    } else {
        AlgoClass::Oja
    };
    let mode = if rng.random_bool(0.5) {
        Mode::Signal
    } else {
        Mode::Noise
    };
    TrackerConfig::new(class, mode, log_uniform(rng, 1e-3, 1e1), policy)
}

struct Acc {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    instances: usize,
    passed: bool,
}

impl Acc {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Acc {
            name,
            tolerance,
            worst: 0.0,
            instances: 0,
            passed: true,
        }
    }

    /// Records `value ≤ tolerance`; NaN fails.
    fn push(&mut self, value: f64) {
        self.instances += 1;
        if value.is_nan() || value > self.tolerance {
            self.passed = false;
        }
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
    }

    fn finish(self, min_instances: usize) -> CheckResult {
        CheckResult {
            name: self.name,
            instances: self.instances,
            worst: self.worst,
            tolerance: self.tolerance,
            passed: self.passed && self.instances >= min_instances,
        }
    }
}

/// Draws instances until `count` applied (non-skipped) steps are seen.
fn for_applied_steps(
    rng: &mut StreamRng,
    count: usize,
    mut cfg_for: impl FnMut(&mut StreamRng) -> TrackerConfig,
    mut visit: impl FnMut(&Instance, &TrackerConfig, &StepRecord) -> Result<()>,
) -> Result<()> {
    let mut seen = 0;
    let mut attempts = 0;
    while seen < count && attempts < 4 * count {
        attempts += 1;
        let inst = draw_instance(rng)?;
        let cfg = cfg_for(rng);
        let (_, rec) = update(&inst.state, &cfg, &inst.x)?;
        if rec.skipped() {
            continue;
        }
        visit(&inst, &cfg, &rec)?;
        seen += 1;
    }
    Ok(())
}

/// `span(T) == span(h, COM)`.
pub fn check_com_invariance(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 1, Purpose::Scratch);
    let mut acc = Acc::new("com_invariance", 1e-14);
    for_applied_steps(
        &mut rng,
        instances,
        |r| random_config(r, ClampPolicy::Generic),
        |inst, cfg, rec| {
            let hc = rotated_update_basis(&inst.state, rec, cfg)?;
            acc.push(span_distance(&rec.t_pre, &hc)?);
            Ok(())
        },
    )?;
    Ok(acc.finish(instances))
}

/// `|xᴴt| ≤ tol·‖x‖‖y‖`.
pub fn check_companion_orthogonality(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 2, Purpose::Scratch);
    let mut acc = Acc::new("companion_orthogonal", 1e-10);
    for _ in 0..instances {
        let inst = draw_instance(&mut rng)?;
        let y = inst.state.basis.apply(&hermitian_apply(&inst.state.basis, &inst.x)?)?;
        let t = companion_t(&inst.x, &y)?;
        acc.push(inst.x.dot(&t).norm() / (inst.x.norm() * y.norm()));
    }
    Ok(acc.finish(instances))
}

/// `‖Wᴴp‖ ≤ 1e-9‖x‖` and `|cᴴx| ≤ 1e-8‖x‖` for every COM column `c`.
/// Reported relative to the tighter bound.
pub fn check_residual_orthogonality(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 3, Purpose::Scratch);
    let mut acc = Acc::new("residual_orthogonal", 1e-9);
    for _ in 0..instances {
        let inst = draw_instance(&mut rng)?;
        let w = &inst.state.basis;
        let y = w.apply(&hermitian_apply(w, &inst.x)?)?;
        let p = inst.x.sub(&y);
        let nx = inst.x.norm();
        let wp = hermitian_apply(w, &p)?.norm() / nx;
        let frame = complete_basis(w, &y)?;
        let com = (1..frame.cols())
            .map(|j| frame.column(j).dot(&inst.x).norm() / nx)
            .fold(0.0, f64::max);
        // rescale the COM residual onto the 1e-9 scale
        acc.push(wp.max(com * 1e-1));
    }
    Ok(acc.finish(instances))
}

/// Generic clamp: `β_eff‖x‖² ≤ 1 + 1e-12`. Reported as the excess over 1.
pub fn check_clamp_bound(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 4, Purpose::Scratch);
    let mut acc = Acc::new("clamp_bound", 1e-12);
    for_applied_steps(
        &mut rng,
        instances,
        |r| random_config(r, ClampPolicy::Generic),
        |inst, _, rec| {
            acc.push((rec.beta_eff * inst.x.norm_sqr() - 1.0).max(0.0));
            Ok(())
        },
    )?;
    Ok(acc.finish(instances))
}

/// Clamped noise-mode steps never turn `h` past `t`:
/// `∠(h, y) ≤ π/2 − ∠(x, y) + 1e-8`. Both classes under the generic
/// clamp.
pub fn check_no_overturn(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 5, Purpose::Scratch);
    let mut acc = Acc::new("no_overturn", 1e-8);
    for_applied_steps(
        &mut rng,
        instances,
        |r| {
            let class = if r.random_bool(0.5) {
                AlgoClass::Dpm
            } else {
                AlgoClass::Oja
            };
            TrackerConfig::new(class, Mode::Noise, log_uniform(r, 1e-3, 1e3), ClampPolicy::Generic)
        },
        |inst, cfg, rec| {
            let h = rotated_vector(rec, &inst.x, cfg)?;
            let excess = vector_angle(&h, &rec.y) - (FRAC_PI_2 - vector_angle(&inst.x, &rec.y));
            acc.push(excess.max(0.0));
            Ok(())
        },
    )?;
    Ok(acc.finish(instances))
}

/// DPM signal mode with any `β > 0` keeps `h` between `y` and `x`.
pub fn check_cone_containment(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 6, Purpose::Scratch);
    let mut acc = Acc::new("cone_containment", 1e-10);
    for_applied_steps(
        &mut rng,
        instances,
        |r| {
            TrackerConfig::new(
                AlgoClass::Dpm,
                Mode::Signal,
                log_uniform(r, 1e-4, 1e4),
                ClampPolicy::Off,
            )
        },
        |inst, cfg, rec| {
            let h = rotated_vector(rec, &inst.x, cfg)?;
            let theta = vector_angle(&rec.y, &inst.x);
            let e1 = vector_angle(&h, &inst.x) - theta;
            let e2 = vector_angle(&h, &rec.y) - theta;
            acc.push(e1.max(e2).max(0.0));
            Ok(())
        },
    )?;
    Ok(acc.finish(instances))
}

/// Closed-form `γ` against the measured `∠(h, y)` for clamped DPM noise
/// steps.
pub fn check_gamma_closed_form(instances: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = stream(seed, 7, Purpose::Scratch);
    let mut acc = Acc::new("gamma_closed_form", 1e-9);
    for_applied_steps(
        &mut rng,
        instances,
        |r| {
            TrackerConfig::new(
                AlgoClass::Dpm,
                Mode::Noise,
                log_uniform(r, 1e-3, 1e3),
                ClampPolicy::Generic,
            )
        },
        |inst, cfg, rec| {
            let h = rotated_vector(rec, &inst.x, cfg)?;
            let gamma = gamma_angle(&inst.x, &rec.y, rec.beta_eff)?;
            acc.push((gamma - vector_angle(&h, &rec.y)).abs());
            Ok(())
        },
    )?;
    Ok(acc.finish(instances))
}

pub fn run_all(instances: usize, seed: u64) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_com_invariance(instances, seed)?,
        check_companion_orthogonality(instances, seed)?,
        check_residual_orthogonality(instances, seed)?,
        check_clamp_bound(instances, seed)?,
        check_no_overturn(instances, seed)?,
        check_cone_containment(instances, seed)?,
        check_gamma_closed_form(instances, seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        for r in run_all(300, 99).unwrap() {
            assert!(r.passed, "{r}");
            assert_eq!(r.instances, 300);
        }
    }

    #[test]
    fn detects_a_broken_bound() {
        let mut acc = Acc::new("x", 1.0);
        acc.push(0.5);
        acc.push(f64::NAN);
        assert!(!acc.finish(2).passed);
    }
}
