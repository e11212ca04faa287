//! Streaming principal/minor subspace tracking (DPM and OJA classes) with a
//! per-step stepsize limiter, and a Monte-Carlo harness for comparing
//! limited and fixed-stepsize trackers on synthetic array data.

pub mod config;
pub mod error;
pub mod export;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod numkit;
pub mod rng;
pub mod selfcheck;
pub mod tracker;

pub use error::{Error, Result};
pub use harness::{run_comparison, run_trial, ComparisonReport, ExperimentSpec};
pub use metrics::{AggregateSeries, MetricSample, SparkEvent};
pub use model::{ScenarioConfig, TrueBases};
pub use numkit::{CMatrix, CVector, C64};
pub use tracker::{AlgoClass, ClampPolicy, Mode, StepRecord, Tracker, TrackerConfig, TrackerState};
