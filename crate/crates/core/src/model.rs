//! Synthetic array snapshots: `x(k) = Σ aᵢ sᵢ(k) + n(k)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkit::{orthonormalize, CMatrix, CVector, C64};
use crate::rng::{complex_gaussian, gaussian_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ManifoldKind {
    /// Orthonormalized i.i.d. complex Gaussian columns.
    #[default]
    Random,
    /// First `L` identity columns.
    Canonical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_sensors: usize,
    pub subspace_rank: usize,
    /// Variance of each source `sᵢ`, one per column of the manifold.
    pub signal_powers: Vec<f64>,
    /// Variance of each entry of `n(k)`.
    pub noise_variance: f64,
    pub n_steps: usize,
    /// 1-based step at which the tracked basis is perturbed.
    pub break_step: Option<usize>,
    pub break_variance: f64,
    pub seed: u64,
    pub manifold: ManifoldKind,
}

impl ScenarioConfig {
    /// Eight sensors, four sources with powers `[10, 1, 0.1, 0.1]`, noise
    /// variance `1e-3`, 6000 steps with a `0.1`-variance break at step 3000.
    pub fn reference() -> Self {
        ScenarioConfig {
            n_sensors: 8,
            subspace_rank: 4,
            signal_powers: vec![10.0, 1.0, 0.1, 0.1],
            noise_variance: 1e-3,
            n_steps: 6000,
            break_step: Some(3000),
            break_variance: 0.1,
            seed: 0x5eed,
            manifold: ManifoldKind::Random,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_sensors == 0 || self.subspace_rank == 0 {
            return bad("n_sensors and subspace_rank must be positive".into());
        }
        if self.subspace_rank > self.n_sensors {
            return bad(format!(
                "subspace_rank {} exceeds n_sensors {}",
                self.subspace_rank, self.n_sensors
            ));
        }
        if self.signal_powers.len() != self.subspace_rank {
            return bad(format!(
                "signal_powers has {} entries, subspace_rank is {}",
                self.signal_powers.len(),
                self.subspace_rank
            ));
        }
        if self.signal_powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("signal_powers must be finite and non-negative".into());
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return bad("noise_variance must be finite and non-negative".into());
        }
        if self.n_steps == 0 {
            return bad("n_steps must be positive".into());
        }
        if let Some(b) = self.break_step {
            if b == 0 || b > self.n_steps {
                return bad(format!("break_step {b} outside [1, {}]", self.n_steps));
            }
        }
        if !(self.break_variance.is_finite() && self.break_variance >= 0.0) {
            return bad("break_variance must be finite and non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueBases {
    /// Columns `aᵢ`, orthonormal.
    pub manifold: CMatrix,
    /// Orthonormal basis `V` of the signal subspace.
    pub signal_basis: CMatrix,
    /// Orthonormal complement of `V`; `None` when `L == N`.
    pub noise_basis: Option<CMatrix>,
}

impl TrueBases {
    pub fn n_sensors(&self) -> usize {
        self.manifold.rows()
    }

    pub fn rank(&self) -> usize {
        self.manifold.cols()
    }
}

pub fn generate_true_bases<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<TrueBases> {
    cfg.validate()?;
    let (n, l) = (cfg.n_sensors, cfg.subspace_rank);
    let frame = match cfg.manifold {
        ManifoldKind::Random => orthonormalize(&gaussian_matrix(rng, n, n, 1.0))?,
        ManifoldKind::Canonical => CMatrix::identity(n),
    };
    let manifold = frame.select_columns(0..l)?;
    let noise_basis = if l < n { Some(frame.select_columns(l..n)?) } else { None };
    Ok(TrueBases {
        signal_basis: manifold.clone(),
        manifold,
        noise_basis,
    })
}

/// One snapshot together with the source amplitudes and noise that made it.
#[derive(Debug, Clone)]
pub struct SnapshotDraw {
    pub x: CVector,
    pub sources: Vec<C64>,
    pub noise: CVector,
}

pub fn draw_snapshot<R: Rng + ?Sized>(bases: &TrueBases, cfg: &ScenarioConfig, rng: &mut R) -> SnapshotDraw {
    let n = bases.n_sensors();
    let sources: Vec<C64> = cfg.signal_powers.iter().map(|&p| complex_gaussian(rng, p)).collect();
    let noise: Vec<C64> = (0..n).map(|_| complex_gaussian(rng, cfg.noise_variance)).collect();
    let mut x = noise.clone();
    for (i, xi) in x.iter_mut().enumerate() {
        for (j, s) in sources.iter().enumerate() {
            *xi += bases.manifold.get(i, j) * s;
        }
    }
    SnapshotDraw {
        x: CVector::from_vec_unchecked(x),
        sources,
        noise: CVector::from_vec_unchecked(noise),
    }
}

pub fn snapshot<R: Rng + ?Sized>(bases: &TrueBases, cfg: &ScenarioConfig, rng: &mut R) -> CVector {
    draw_snapshot(bases, cfg, rng).x
}

/// `W + E` with i.i.d. complex Gaussian `E`. Not re-orthonormalized.
pub fn perturb_basis<R: Rng + ?Sized>(w: &CMatrix, break_variance: f64, rng: &mut R) -> CMatrix {
    let e = gaussian_matrix(rng, w.rows(), w.cols(), break_variance);
    w.add(&e).expect("same shape")
}
