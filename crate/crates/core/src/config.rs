//! Flat `key = value` experiment files.
//!
//! ```text
//! # reference scenario
//! n_sensors = 8
//! subspace_rank = 4
//! signal_powers = 10, 1, 0.1, 0.1
//! noise_variance = 1e-3
//! n_steps = 6000
//! break_step = 3000
//! break_variance = 0.1
//! seed = 1
//! ```
//!
//! Scenario keys are required except `break_step` (absent or `none` means
//! no break) and `manifold`. Tracker and harness keys are optional and
//! default to the reference experiment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::ExperimentSpec;
use crate::model::{ManifoldKind, ScenarioConfig};
use crate::tracker::{AlgoClass, ClampPolicy, Mode};

const SCENARIO_KEYS: [&str; 8] = [
    "n_sensors",
    "subspace_rank",
    "signal_powers",
    "noise_variance",
    "n_steps",
    "break_step",
    "break_variance",
    "seed",
];

const OPTIONAL_KEYS: [&str; 10] = [
    "manifold",
    "algo_class",
    "mode",
    "beta",
    "clamp_policy",
    "n_runs",
    "burn_in",
    "spark_window",
    "spark_threshold_db",
    "output_path",
];

impl FromStr for AlgoClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dpm" => Ok(AlgoClass::Dpm),
            "oja" => Ok(AlgoClass::Oja),
            _ => Err(Error::Config(format!("unknown algo_class `{s}` (dpm|oja)"))),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "signal" => Ok(Mode::Signal),
            "noise" => Ok(Mode::Noise),
            _ => Err(Error::Config(format!("unknown mode `{s}` (signal|noise)"))),
        }
    }
}

impl FromStr for ClampPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(ClampPolicy::Off),
            "generic" => Ok(ClampPolicy::Generic),
            "class" | "class_specific" | "classspecific" => Ok(ClampPolicy::ClassSpecific),
            _ => Err(Error::Config(format!("unknown clamp policy `{s}` (off|generic|class)"))),
        }
    }
}

impl FromStr for ManifoldKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(ManifoldKind::Random),
            "canonical" => Ok(ManifoldKind::Canonical),
            _ => Err(Error::Config(format!("unknown manifold `{s}` (random|canonical)"))),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("cannot parse `{raw}` for key `{key}`")))
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',').map(|v| parse_value(key, v.trim())).collect()
}

/// Splits the text into key/value pairs, rejecting unknown and repeated keys.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if !SCENARIO_KEYS.contains(&k) && !OPTIONAL_KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(map)
}

pub fn parse_experiment(text: &str) -> Result<ExperimentSpec> {
    let map = parse_pairs(text)?;
    let required = |k: &str| {
        map.get(k)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing key `{k}`")))
    };

    let break_step = match map.get("break_step").map(String::as_str) {
        None | Some("none") | Some("") => None,
        Some(v) => Some(parse_value("break_step", v)?),
    };
    let scenario = ScenarioConfig {
        n_sensors: parse_value("n_sensors", required("n_sensors")?)?,
        subspace_rank: parse_value("subspace_rank", required("subspace_rank")?)?,
        signal_powers: parse_list("signal_powers", required("signal_powers")?)?,
        noise_variance: parse_value("noise_variance", required("noise_variance")?)?,
        n_steps: parse_value("n_steps", required("n_steps")?)?,
        break_step,
        break_variance: parse_value("break_variance", required("break_variance")?)?,
        seed: parse_value("seed", required("seed")?)?,
        manifold: map.get("manifold").map(|v| v.parse()).transpose()?.unwrap_or_default(),
    };

    let mut spec = ExperimentSpec::reference();
    spec.scenario = scenario;
    if let Some(v) = map.get("algo_class") {
        spec.tracker.algo_class = v.parse()?;
    }
    if let Some(v) = map.get("mode") {
        spec.tracker.mode = v.parse()?;
    }
    if let Some(v) = map.get("beta") {
        spec.tracker.beta_nominal = parse_value("beta", v)?;
    }
    if let Some(v) = map.get("clamp_policy") {
        spec.tracker.clamp_policy = v.parse()?;
    }
    if let Some(v) = map.get("n_runs") {
        spec.n_runs = parse_value("n_runs", v)?;
    }
    if let Some(v) = map.get("burn_in") {
        spec.burn_in = parse_value("burn_in", v)?;
    }
    if let Some(v) = map.get("spark_window") {
        spec.spark_window = parse_value("spark_window", v)?;
    }
    if let Some(v) = map.get("spark_threshold_db") {
        spec.spark_threshold_db = parse_value("spark_threshold_db", v)?;
    }
    if let Some(v) = map.get("output_path") {
        spec.output_path = PathBuf::from(v);
    }
    spec.validate()?;
    Ok(spec)
}

pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_experiment(&text)
}
