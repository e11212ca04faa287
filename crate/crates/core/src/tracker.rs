//! DPM and OJA class subspace trackers with a per-step stepsize limiter.
//!
//! One step of either class:
//!
//! ```text
//! q = Wᴴx          coordinates of x in the current basis
//! y = Wq           projection of x onto span(W)
//! p = x − y        residual
//! T = W ± β·d·qᴴ   d = x (DPM) or d = p (OJA); + tracks signal, − tracks noise
//! W ← orthnorm(T)
//! ```
//!
//! The update only rotates the basis inside `span(x, y)`: writing the old
//! basis as `(y/‖y‖, COM)` with `COM ⊥ y`, the new span is `(h, COM)` with
//! `h = y/‖y‖ ± β‖q‖d`. A fixed `β` can push `h` past `x` (signal) or past
//! the companion vector `t` (noise), which shows up as spikes in the
//! steady-state error. Limiting `β` to `1/‖x‖²` keeps `h` inside its cone.
//!
//! Orthonormalization is a full QR each step, so a step costs `O(NL²)`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkit::{complete_basis, hermitian_apply, orthonormalize, vector_angle, CMatrix, CVector, NORM_TOL};
use crate::rng::gaussian_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoClass {
    Dpm,
    Oja,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Principal subspace.
    Signal,
    /// Minor subspace.
    Noise,
}

impl Mode {
    fn sign(self) -> f64 {
        match self {
            Mode::Signal => 1.0,
            Mode::Noise => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClampPolicy {
    /// Fixed stepsize.
    Off,
    /// `β_eff = min(β, 1/‖x‖²)`.
    #[default]
    Generic,
    /// Per class and mode: `1/‖x‖²` for DPM/noise, `1/‖p‖²` for OJA/noise,
    /// `1/‖y‖²` for OJA/signal, and no limit for DPM/signal.
    ClassSpecific,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub algo_class: AlgoClass,
    pub mode: Mode,
    pub beta_nominal: f64,
    pub clamp_policy: ClampPolicy,
}

impl TrackerConfig {
    pub fn new(algo_class: AlgoClass, mode: Mode, beta_nominal: f64, clamp_policy: ClampPolicy) -> Self {
        TrackerConfig {
            algo_class,
            mode,
            beta_nominal,
            clamp_policy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_nominal.is_finite() && self.beta_nominal > 0.0) {
            return Err(Error::Config(format!(
                "beta must be positive and finite, got {}",
                self.beta_nominal
            )));
        }
        Ok(())
    }

    pub fn with_policy(self, clamp_policy: ClampPolicy) -> Self {
        TrackerConfig { clamp_policy, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub basis: CMatrix,
    pub step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Applied,
    /// A norm needed by the step fell below `NORM_TOL`.
    SkippedDegenerate,
    /// `T` lost rank and could not be orthonormalized.
    SkippedRankDeficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub q: CVector,
    pub y: CVector,
    pub p: CVector,
    /// Stepsize actually used; zero when the step was skipped before the
    /// stepsize could be computed.
    pub beta_eff: f64,
    /// `T(k)` before orthonormalization.
    pub t_pre: CMatrix,
    pub status: StepStatus,
}

impl StepRecord {
    pub fn skipped(&self) -> bool {
        self.status != StepStatus::Applied
    }
}

pub fn init_tracker<R: Rng + ?Sized>(n: usize, l: usize, rng: &mut R) -> Result<TrackerState> {
    if n == 0 || l == 0 || l > n {
        return Err(Error::Config(format!("invalid tracker shape {n}x{l}")));
    }
    Ok(TrackerState {
        basis: orthonormalize(&gaussian_matrix(rng, n, l, 1.0))?,
        step: 0,
    })
}

/// Effective stepsize for one step.
///
/// Returns [`Error::Degenerate`] when the norm the active rule divides by
/// is numerically zero; the caller treats that as "skip this step".
pub fn clamp_beta(cfg: &TrackerConfig, x: &CVector, y: &CVector, p: &CVector) -> Result<f64> {
    let bound = |what: &'static str, v: &CVector| {
        let n2 = v.norm_sqr();
        if n2.sqrt() < NORM_TOL {
            Err(Error::Degenerate { what, norm: n2.sqrt() })
        } else {
            Ok(1.0 / n2)
        }
    };
    let beta = cfg.beta_nominal;
    match cfg.clamp_policy {
        ClampPolicy::Off => Ok(beta),
        ClampPolicy::Generic => Ok(beta.min(bound("x", x)?)),
        ClampPolicy::ClassSpecific => match (cfg.algo_class, cfg.mode) {
            (AlgoClass::Dpm, Mode::Signal) => Ok(beta),
            (AlgoClass::Dpm, Mode::Noise) => Ok(beta.min(bound("x", x)?)),
            (AlgoClass::Oja, Mode::Noise) => Ok(beta.min(bound("p", p)?)),
            (AlgoClass::Oja, Mode::Signal) => Ok(beta.min(bound("y", y)?)),
        },
    }
}

/// One tracker step. Pure: the input state is left untouched.
///
/// Only malformed input (wrong length, non-finite entries) is an error;
/// numerically degenerate steps keep the basis and are flagged in the
/// returned record.
pub fn update(state: &TrackerState, cfg: &TrackerConfig, x: &CVector) -> Result<(TrackerState, StepRecord)> {
    let w = &state.basis;
    if x.len() != w.rows() {
        return Err(Error::dims("update", w.rows(), x.len()));
    }
    if !x.is_finite() {
        return Err(Error::Config("snapshot has non-finite entries".into()));
    }
    let q = hermitian_apply(w, x)?;
    let y = w.apply(&q)?;
    let p = x.sub(&y);

    let skip = |q, y, p, beta_eff, status| {
        let next = TrackerState {
            basis: w.clone(),
            step: state.step + 1,
        };
        let rec = StepRecord {
            q,
            y,
            p,
            beta_eff,
            t_pre: w.clone(),
            status,
        };
        Ok((next, rec))
    };

    if x.norm() < NORM_TOL {
        return skip(q, y, p, 0.0, StepStatus::SkippedDegenerate);
    }
    let beta_eff = match clamp_beta(cfg, x, &y, &p) {
        Ok(b) => b,
        Err(_) => return skip(q, y, p, 0.0, StepStatus::SkippedDegenerate),
    };
    let d = match cfg.algo_class {
        AlgoClass::Dpm => x,
        AlgoClass::Oja => &p,
    };
    let t = w.rank_one_update(&d.scale_real(cfg.mode.sign() * beta_eff), &q)?;
    match orthonormalize(&t) {
        Ok(basis) => Ok((
            TrackerState {
                basis,
                step: state.step + 1,
            },
            StepRecord {
                q,
                y,
                p,
                beta_eff,
                t_pre: t,
                status: StepStatus::Applied,
            },
        )),
        Err(Error::RankDeficient { .. }) => skip(q, y, p, beta_eff, StepStatus::SkippedRankDeficient),
        Err(e) => Err(e),
    }
}

/// Convenience owner of a config and a state.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub config: TrackerConfig,
    pub state: TrackerState,
}

impl Tracker {
    pub fn new<R: Rng + ?Sized>(config: TrackerConfig, n: usize, l: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        Ok(Tracker {
            config,
            state: init_tracker(n, l, rng)?,
        })
    }

    pub fn with_basis(config: TrackerConfig, basis: CMatrix) -> Result<Self> {
        config.validate()?;
        Ok(Tracker {
            config,
            state: TrackerState { basis, step: 0 },
        })
    }

    pub fn step(&mut self, x: &CVector) -> Result<StepRecord> {
        let (next, rec) = update(&self.state, &self.config, x)?;
        self.state = next;
        Ok(rec)
    }

    pub fn basis(&self) -> &CMatrix {
        &self.state.basis
    }
}

/// `t = y − x·(xᴴy)/(xᴴx)`, the component of `y` orthogonal to `x`.
pub fn companion_t(x: &CVector, y: &CVector) -> Result<CVector> {
    if x.len() != y.len() {
        return Err(Error::dims("companion_t", x.len(), y.len()));
    }
    let nx2 = x.norm_sqr();
    if nx2.sqrt() < NORM_TOL {
        return Err(Error::Degenerate {
            what: "x",
            norm: nx2.sqrt(),
        });
    }
    Ok(y.axpy(-x.dot(y) / nx2, x))
}

/// Closed-form angle between `y` and the updated vector `h` for a DPM
/// noise-mode step:
///
/// `tan γ = β‖x‖‖y‖ sin θ / (1 − β‖x‖‖y‖ cos θ)`, `θ = ∠(x, y)`.
///
/// A non-positive denominator means `h` has turned through a right angle
/// or more, past `t`; that is reported as [`Error::Overturn`].
pub fn gamma_angle(x: &CVector, y: &CVector, beta: f64) -> Result<f64> {
    let (nx, ny) = (x.norm(), y.norm());
    if nx < NORM_TOL {
        return Err(Error::Degenerate { what: "x", norm: nx });
    }
    if ny < NORM_TOL {
        return Err(Error::Degenerate { what: "y", norm: ny });
    }
    let theta = vector_angle(x, y);
    let a = beta * nx * ny;
    let denominator = 1.0 - a * theta.cos();
    if denominator <= 0.0 {
        return Err(Error::Overturn { denominator });
    }
    Ok((a * theta.sin()).atan2(denominator))
}

/// Largest `γ` that keeps `h` between `y` and `t`: `π/2 − ∠(x, y)`.
pub fn overturn_limit(x: &CVector, y: &CVector) -> f64 {
    FRAC_PI_2 - vector_angle(x, y)
}

/// The rotated basis vector `h = y/‖y‖ ± β_eff·‖q‖·d` of a recorded step.
pub fn rotated_vector(rec: &StepRecord, x: &CVector, cfg: &TrackerConfig) -> Result<CVector> {
    let ny = rec.y.norm();
    if ny < NORM_TOL {
        return Err(Error::Degenerate { what: "y", norm: ny });
    }
    let d = match cfg.algo_class {
        AlgoClass::Dpm => x,
        AlgoClass::Oja => &rec.p,
    };
    let coef = cfg.mode.sign() * rec.beta_eff * rec.q.norm();
    Ok(rec.y.scale_real(1.0 / ny).add(&d.scale_real(coef)))
}

/// Rebuilds the step in the `(y/‖y‖, COM)` frame: returns `(h, COM)`,
/// which spans the same space as `rec.t_pre` when the previous basis was
/// orthonormal.
///
/// `x` is recovered as `y + p`.
pub fn rotated_update_basis(state_prev: &TrackerState, rec: &StepRecord, cfg: &TrackerConfig) -> Result<CMatrix> {
    let frame = complete_basis(&state_prev.basis, &rec.y)?;
    let x = rec.y.add(&rec.p);
    let h = rotated_vector(rec, &x, cfg)?;
    let mut cols = frame.columns();
    cols[0] = h;
    CMatrix::from_columns(&cols)
}
