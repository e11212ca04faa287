use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use subtrace::config::load_experiment;
use subtrace::export::{export_csv, export_plot, export_series_plot};
use subtrace::harness::{run_arm, run_comparison, summarize_arm, ExperimentSpec};
use subtrace::{selfcheck, ClampPolicy, Error};

#[derive(Parser, Debug)]
#[command(name = "subtrace", version, about = "Subspace tracking experiments")]
struct Cli {
    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ClampArg {
    Off,
    Generic,
    Class,
}

impl From<ClampArg> for ClampPolicy {
    fn from(c: ClampArg) -> Self {
        match c {
            ClampArg::Off => ClampPolicy::Off,
            ClampArg::Generic => ClampPolicy::Generic,
            ClampArg::Class => ClampPolicy::ClassSpecific,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one tracker configuration over all runs; writes series.csv and series.svg.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        clamp: Option<ClampArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fixed vs limited stepsize on identical inputs; writes CSVs, a plot and a spark summary.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized checks of the update geometry.
    Geometry {
        #[arg(long, required = true)]
        selfcheck: bool,
        #[arg(long, default_value_t = 10_000)]
        instances: usize,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_SELFCHECK: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn load(config: &Path, seed: Option<u64>) -> subtrace::Result<ExperimentSpec> {
    let mut spec = load_experiment(config)?;
    if let Some(s) = seed {
        spec.scenario.seed = s;
    }
    Ok(spec)
}

fn create_dir(out: &Path) -> subtrace::Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })
}

fn simulate(config: &Path, clamp: Option<ClampArg>, out: &Path, seed: Option<u64>) -> subtrace::Result<()> {
    let mut spec = load(config, seed)?;
    if let Some(c) = clamp {
        spec.tracker.clamp_policy = c.into();
    }
    create_dir(out)?;
    let runs = run_arm(&spec, &spec.tracker)?;
    let arm = summarize_arm(&spec, spec.tracker, &runs)?;
    export_csv(&arm.series, &out.join("series.csv"))?;
    export_series_plot(&arm.series, spec.scenario.break_step, &out.join("series.svg"))?;
    println!(
        "runs={} steps={} sparks={}",
        spec.n_runs,
        arm.series.len(),
        arm.sparks.len()
    );
    Ok(())
}

fn compare(config: &Path, out: &Path, seed: Option<u64>) -> subtrace::Result<()> {
    let spec = load(config, seed)?;
    create_dir(out)?;
    let report = run_comparison(&spec)?;
    export_csv(&report.series_original, &out.join("original.csv"))?;
    export_csv(&report.series_amended, &out.join("amended.csv"))?;
    export_plot(&report, &out.join("comparison.svg"))?;
    println!(
        "sparks original={} amended={}",
        report.sparks_original.len(),
        report.sparks_amended.len()
    );
    println!(
        "steady_state_db original={:.3} amended={:.3}",
        report.steady_state_db.original, report.steady_state_db.amended
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate { config, clamp, out } => simulate(config, *clamp, out, cli.seed),
        Command::Compare { config, out } => compare(config, out, cli.seed),
        Command::Geometry { instances, .. } => {
            let seed = cli.seed.unwrap_or(0x9e0);
            match selfcheck::run_all(*instances, seed) {
                Ok(results) => {
                    results.iter().for_each(|r| println!("{r}"));
                    return if results.iter().all(|r| r.passed) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_SELFCHECK)
                    };
                }
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
