//! Monte-Carlo trials and paired original-vs-limited comparisons.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{
    aggregate, coordinate_power, detect_sparks, orthonormality_error, projection_error, residual_power,
    AggregateSeries, MetricSample, SparkConfig, SparkEvent,
};
use crate::model::{generate_true_bases, perturb_basis, snapshot, ScenarioConfig};
use crate::rng::{stream, Purpose};
use crate::tracker::{init_tracker, update, AlgoClass, ClampPolicy, Mode, TrackerConfig};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "SUBTRACE_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub tracker: TrackerConfig,
    pub n_runs: usize,
    pub burn_in: usize,
    pub spark_window: usize,
    pub spark_threshold_db: f64,
    pub output_path: PathBuf,
}

impl ExperimentSpec {
    /// OJA noise tracking with `β = 0.08` over 100 runs of the reference
    /// scenario.
    pub fn reference() -> Self {
        ExperimentSpec {
            scenario: ScenarioConfig::reference(),
            tracker: TrackerConfig::new(AlgoClass::Oja, Mode::Noise, 0.08, ClampPolicy::Generic),
            n_runs: 100,
            burn_in: 1000,
            spark_window: 500,
            spark_threshold_db: 10.0,
            output_path: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.tracker.validate()?;
        if self.n_runs == 0 {
            return Err(Error::Config("n_runs must be at least 1".into()));
        }
        if self.spark_window < 16 {
            return Err(Error::Config("spark_window must be at least 16".into()));
        }
        Ok(())
    }

    pub fn spark_config(&self) -> SparkConfig {
        SparkConfig {
            burn_in: self.burn_in,
            window: self.spark_window,
            threshold_db: self.spark_threshold_db,
            break_step: self.scenario.break_step,
        }
    }
}

/// One run of `spec.scenario` with an explicit tracker configuration.
///
/// Truth, initial basis, snapshots and the break all come from streams
/// keyed by `(scenario.seed, run_index)` only, so two configurations given
/// the same run index see identical inputs.
pub fn run_trial_with(spec: &ExperimentSpec, tracker: &TrackerConfig, run_index: usize) -> Result<Vec<MetricSample>> {
    let sc = &spec.scenario;
    sc.validate()?;
    tracker.validate()?;
    let run = run_index as u64;
    let truth = generate_true_bases(sc, &mut stream(sc.seed, run, Purpose::Truth))?;
    let mut state = init_tracker(sc.n_sensors, sc.subspace_rank, &mut stream(sc.seed, run, Purpose::Init))?;
    let mut snap_rng = stream(sc.seed, run, Purpose::Snapshots);
    let mut break_rng = stream(sc.seed, run, Purpose::Break);

    let mut samples = Vec::with_capacity(sc.n_steps);
    for k in 1..=sc.n_steps {
        let x = snapshot(&truth, sc, &mut snap_rng);
        let is_break = sc.break_step == Some(k);
        if is_break {
            state.basis = perturb_basis(&state.basis, sc.break_variance, &mut break_rng);
        }
        let coord_power = coordinate_power(&state.basis, &x)?;
        let resid_power = residual_power(&state.basis, &x)?;
        // At the break the perturbed basis is what gets recorded.
        let (ep_pre, eta_pre) = if is_break {
            (
                projection_error(&state.basis, &truth, tracker.mode)?,
                orthonormality_error(&state.basis),
            )
        } else {
            (0.0, 0.0)
        };
        let (next, rec) = update(&state, tracker, &x)?;
        state = next;
        let (ep, eta) = if is_break {
            (ep_pre, eta_pre)
        } else {
            (
                projection_error(&state.basis, &truth, tracker.mode)?,
                orthonormality_error(&state.basis),
            )
        };
        samples.push(MetricSample {
            step: k as u64,
            ep,
            eta,
            coord_power,
            resid_power,
            beta_eff: rec.beta_eff,
            skipped: rec.skipped(),
        });
    }
    Ok(samples)
}

pub fn run_trial(spec: &ExperimentSpec, run_index: usize) -> Result<Vec<MetricSample>> {
    run_trial_with(spec, &spec.tracker, run_index)
}

fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// All `n_runs` trials of one configuration, ordered by run index.
pub fn run_arm(spec: &ExperimentSpec, tracker: &TrackerConfig) -> Result<Vec<Vec<MetricSample>>> {
    with_pool(|| {
        (0..spec.n_runs)
            .into_par_iter()
            .map(|r| run_trial_with(spec, tracker, r))
            .collect::<Result<Vec<_>>>()
    })?
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub tracker: TrackerConfig,
    pub series: AggregateSeries,
    pub sparks: Vec<SparkEvent>,
}

pub fn summarize_arm(spec: &ExperimentSpec, tracker: TrackerConfig, runs: &[Vec<MetricSample>]) -> Result<ArmResult> {
    let series = aggregate(runs)?;
    let cfg = spec.spark_config();
    let mut sparks = Vec::new();
    for (r, run) in runs.iter().enumerate() {
        let eps: Vec<f64> = run.iter().map(|s| s.ep).collect();
        sparks.extend(detect_sparks(&eps, r, &cfg)?);
    }
    Ok(ArmResult {
        tracker,
        series,
        sparks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub original: f64,
    pub amended: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub series_original: AggregateSeries,
    pub series_amended: AggregateSeries,
    pub sparks_original: Vec<SparkEvent>,
    pub sparks_amended: Vec<SparkEvent>,
    /// Mean `ep_avg` over the last 1000 steps, in dB.
    pub steady_state_db: SteadyState,
    pub break_step: Option<usize>,
}

fn tail_db(series: &AggregateSeries) -> f64 {
    let last = series.steps.last().copied().unwrap_or(0);
    series.mean_ep_db(last.saturating_sub(999).max(1), last)
}

/// Runs every trial twice on identical inputs: once with a fixed stepsize
/// and once with `spec.tracker.clamp_policy`.
pub fn run_comparison(spec: &ExperimentSpec) -> Result<ComparisonReport> {
    spec.validate()?;
    let original_cfg = spec.tracker.with_policy(ClampPolicy::Off);
    let amended_cfg = spec.tracker;
    let original = summarize_arm(spec, original_cfg, &run_arm(spec, &original_cfg)?)?;
    let amended = summarize_arm(spec, amended_cfg, &run_arm(spec, &amended_cfg)?)?;
    Ok(ComparisonReport {
        steady_state_db: SteadyState {
            original: tail_db(&original.series),
            amended: tail_db(&amended.series),
        },
        series_original: original.series,
        series_amended: amended.series,
        sparks_original: original.sparks,
        sparks_amended: amended.sparks,
        break_step: spec.scenario.break_step,
    })
}
