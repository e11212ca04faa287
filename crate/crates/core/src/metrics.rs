//! Error criteria, spark detection and cross-run aggregation.

use crate::error::{Error, Result};
use crate::model::TrueBases;
use crate::numkit::{hermitian_apply, CMatrix, CVector};
use crate::tracker::Mode;

/// Linear values below this are written as `DB_FLOOR` dB.
pub const DB_FLOOR_LINEAR: f64 = 1e-300;
pub const DB_FLOOR: f64 = -3000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    /// 1-based step index.
    pub step: u64,
    /// Projection error power `‖P_ref − P_W‖_F²`.
    pub ep: f64,
    /// Orthonormality error `‖WᴴW − I‖_F²`.
    pub eta: f64,
    /// `‖Wᴴx‖²` against the basis the step started from.
    pub coord_power: f64,
    /// `‖x − WWᴴx‖²` against the basis the step started from.
    pub resid_power: f64,
    pub beta_eff: f64,
    pub skipped: bool,
}

pub fn to_db(linear: f64) -> f64 {
    if linear < DB_FLOOR_LINEAR {
        DB_FLOOR
    } else {
        10.0 * linear.log10()
    }
}

/// `‖P_ref − WWᴴ‖_F²` with `P_ref = VVᴴ` (signal) or `I − VVᴴ` (noise).
///
/// Evaluated in trace form,
/// `rank(P_ref) − 2‖V_refᴴW‖_F² + ‖WᴴW‖_F²`,
/// which holds for any `W`, orthonormal or not. In noise mode `V_ref` is
/// the complement basis, so the ranks of the two projectors may differ.
pub fn projection_error(w: &CMatrix, truth: &TrueBases, mode: Mode) -> Result<f64> {
    let n = truth.n_sensors();
    if w.rows() != n {
        return Err(Error::dims("projection_error", n, w.rows()));
    }
    let reference = match mode {
        Mode::Signal => Some(&truth.signal_basis),
        Mode::Noise => truth.noise_basis.as_ref(),
    };
    let (rank, cross) = match reference {
        Some(v) => (v.cols() as f64, v.adjoint().matmul(w)?.frobenius_norm_sqr()),
        None => (0.0, 0.0),
    };
    let ep = rank - 2.0 * cross + w.gram().frobenius_norm_sqr();
    Ok(ep.max(0.0))
}

pub fn orthonormality_error(w: &CMatrix) -> f64 {
    w.gram()
        .sub(&CMatrix::identity(w.cols()))
        .expect("square")
        .frobenius_norm_sqr()
}

/// `‖Wᴴx‖²`
pub fn coordinate_power(w: &CMatrix, x: &CVector) -> Result<f64> {
    Ok(hermitian_apply(w, x)?.norm_sqr())
}

/// `‖x − WWᴴx‖²`
pub fn residual_power(w: &CMatrix, x: &CVector) -> Result<f64> {
    let y = w.apply(&hermitian_apply(w, x)?)?;
    Ok(x.sub(&y).norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparkConfig {
    pub burn_in: usize,
    pub window: usize,
    pub threshold_db: f64,
    /// Steps `break_step ..= break_step + window` are never reported.
    pub break_step: Option<usize>,
}

impl Default for SparkConfig {
    fn default() -> Self {
        SparkConfig {
            burn_in: 1000,
            window: 500,
            threshold_db: 10.0,
            break_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparkEvent {
    pub run_index: usize,
    pub step: usize,
    /// Excess over the trailing median.
    pub magnitude_db: f64,
}

/// Flags steps whose error exceeds the median of the preceding `window`
/// steps by at least `threshold_db`.
///
/// `series[i]` is the error at step `i + 1`. Only steps after `burn_in`
/// with a full trailing window are examined.
pub fn detect_sparks(series: &[f64], run_index: usize, cfg: &SparkConfig) -> Result<Vec<SparkEvent>> {
    if cfg.window < 16 {
        return Err(Error::Config(format!("spark window {} < 16", cfg.window)));
    }
    if cfg.burn_in >= series.len() {
        return Err(Error::Config(format!(
            "burn_in {} not below series length {}",
            cfg.burn_in,
            series.len()
        )));
    }
    let w = cfg.window;
    let mut sorted: Vec<f64> = Vec::with_capacity(w + 1);
    let mut events = Vec::new();
    for (idx, &ep) in series.iter().enumerate() {
        let step = idx + 1;
        let exempt = cfg.break_step.is_some_and(|b| step >= b && step <= b + w);
        if step > cfg.burn_in && idx >= w && !exempt {
            let baseline = if w % 2 == 1 {
                sorted[w / 2]
            } else {
                0.5 * (sorted[w / 2 - 1] + sorted[w / 2])
            };
            let excess = 10.0 * (ep / baseline.max(DB_FLOOR_LINEAR)).log10();
            if excess >= cfg.threshold_db {
                events.push(SparkEvent {
                    run_index,
                    step,
                    magnitude_db: excess,
                });
            }
        }
        let pos = sorted.partition_point(|v| v.total_cmp(&ep).is_lt());
        sorted.insert(pos, ep);
        if idx >= w {
            let old = series[idx - w];
            let pos = sorted.partition_point(|v| v.total_cmp(&old).is_lt());
            sorted.remove(pos);
        }
    }
    Ok(events)
}

/// Per-step mean and maximum across runs, in the linear domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub steps: Vec<u64>,
    pub ep_avg: Vec<f64>,
    pub ep_max: Vec<f64>,
    pub eta_avg: Vec<f64>,
    pub eta_max: Vec<f64>,
    pub n_runs: usize,
}

impl AggregateSeries {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Mean of `ep_avg` over the 1-based inclusive step range, in dB.
    pub fn mean_ep_db(&self, first_step: u64, last_step: u64) -> f64 {
        let vals: Vec<f64> = self
            .steps
            .iter()
            .zip(&self.ep_avg)
            .filter(|(s, _)| (first_step..=last_step).contains(*s))
            .map(|(_, v)| *v)
            .collect();
        to_db(vals.iter().sum::<f64>() / vals.len().max(1) as f64)
    }
}

pub fn aggregate(runs: &[Vec<MetricSample>]) -> Result<AggregateSeries> {
    let Some(first) = runs.first() else {
        return Err(Error::Config("cannot aggregate zero runs".into()));
    };
    let len = first.len();
    if let Some(bad) = runs.iter().find(|r| r.len() != len) {
        return Err(Error::dims("aggregate", len, bad.len()));
    }
    let n = runs.len() as f64;
    let mut out = AggregateSeries {
        steps: first.iter().map(|s| s.step).collect(),
        ep_avg: vec![0.0; len],
        ep_max: vec![f64::NEG_INFINITY; len],
        eta_avg: vec![0.0; len],
        eta_max: vec![f64::NEG_INFINITY; len],
        n_runs: runs.len(),
    };
    for run in runs {
        for (k, s) in run.iter().enumerate() {
            out.ep_avg[k] += s.ep;
            out.ep_max[k] = out.ep_max[k].max(s.ep);
            out.eta_avg[k] += s.eta;
            out.eta_max[k] = out.eta_max[k].max(s.eta);
        }
    }
    out.ep_avg.iter_mut().for_each(|v| *v /= n);
    out.eta_avg.iter_mut().for_each(|v| *v /= n);
    Ok(out)
}
