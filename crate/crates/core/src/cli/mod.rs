//! The `risblock` command line.
//!
//! ```text
//! risblock generate  [--config F] [--out DIR] [--seed S] [--n N]
//! risblock train     [--config F] [--dataset DIR] [--out DIR] [--seed S] [--scenario S]...
//! risblock eval      [--config F] [--dataset DIR] [--models DIR] [--out DIR] [--scenario S]...
//! risblock run       [--config F] [--out DIR] [--seed S] [--n N]
//! risblock gradcheck [--seed S] [--draws K]
//! risblock curves    [--out DIR]
//! ```
//!
//! `--seed` beats `RISBLOCK_SEED`, which beats the config file's `seed`.
//! Exit codes: 0 success, 1 runtime failure, 2 bad config or arguments.

mod curves;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::learn::random_grad_checks;
use crate::pipeline::{
    evaluate_models, load_models, run_experiment, train_models, write_models, write_reports, ExperimentConfig, Scenario,
};
use crate::scene::{generate_dataset, Dataset};

pub use curves::{curves_csv, curves_svg, read_curves, write_curves, CURVES_CSV_FILE, CURVES_SVG_FILE};

pub const SEED_ENV: &str = "RISBLOCK_SEED";
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "risblock", version, about = "Blockage prediction with a camera and an RIS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled dataset.
    Generate(GenerateArgs),
    /// Train scenario models on a dataset.
    Train(TrainArgs),
    /// Evaluate trained models on the held-out split.
    Eval(EvalArgs),
    /// Generate, train and evaluate in one go.
    Run(RunArgs),
    /// Check backpropagation against finite differences.
    Gradcheck(GradcheckArgs),
    /// Merge accuracy curves into one CSV and an SVG chart.
    Curves(CurvesArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "data")]
    pub out: PathBuf,
    /// Number of samples.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset directory; falls back to `dataset_dir` in the config, then `data`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value = "models")]
    pub out: PathBuf,
    /// none, camera, ris or both; repeatable. All four when omitted.
    #[arg(long)]
    pub scenario: Vec<Scenario>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value = "models")]
    pub models: PathBuf,
    #[arg(long, default_value = "metrics")]
    pub out: PathBuf,
    #[arg(long)]
    pub scenario: Vec<Scenario>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "experiment")]
    pub out: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub draws: usize,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Directory holding `curve_<scenario>.csv`; outputs go next to them.
    #[arg(long, default_value = "metrics")]
    pub out: PathBuf,
}

/// Reads the config, applies the seed precedence, and validates.
pub fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = env_seed()? {
        cfg.seed = Some(s);
    }
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    let cfg = cfg.resolved();
    cfg.validate()?;
    Ok(cfg)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::InvalidParameter(format!("{SEED_ENV}: {e}"))),
    }
}

fn scenarios(requested: &[Scenario]) -> Vec<Scenario> {
    if requested.is_empty() {
        return Scenario::ALL.to_vec();
    }
    Scenario::ALL.into_iter().filter(|s| requested.contains(s)).collect()
}

fn dataset_dir(flag: &Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.clone()
        .or_else(|| cfg.dataset_dir.clone())
        .unwrap_or_else(|| PathBuf::from("data"))
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(n) = args.n {
        cfg.dataset.n_samples = n;
        cfg.validate()?;
    }
    let ds = generate_dataset(&cfg.dataset)?;
    ds.write(&args.out)?;
    let c = ds.class_counts();
    eprintln!(
        "generated {} samples (absent {}, unblocked {}, blocked {}) in {}",
        ds.samples.len(),
        c.absent,
        c.unblocked,
        c.blocked,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let dir = dataset_dir(&args.dataset, &cfg);
    let ds = Dataset::load(&dir)?;
    let a = train_models(&ds, &cfg.train, &cfg.pipeline, &scenarios(&args.scenario))?;
    write_models(&args.out, &a)?;
    for (m, t) in a.models.iter().zip(&a.train_time_s) {
        let last = m.history.last().map_or(f64::NAN, |r| r.loss);
        eprintln!("trained {} in {t:.2} s, final batch loss {last:.4}", m.scenario);
    }
    eprintln!("rate threshold {} -> {}", a.cascade.fit.threshold, args.out.display());
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    let ds = Dataset::load(&dataset_dir(&args.dataset, &cfg))?;
    let a = load_models(&args.models, &scenarios(&args.scenario))?;
    let reports = evaluate_models(&ds, &a, &cfg.pipeline)?;
    write_reports(&args.out, &reports)?;
    for r in &reports {
        println!("{}\t{:.4}", r.scenario, r.accuracy);
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(n) = args.n {
        cfg.dataset.n_samples = n;
    }
    let summary = run_experiment(&cfg, &args.out)?;
    for r in &summary.reports {
        println!("{}\t{:.4}", r.scenario, r.accuracy);
    }
    Ok(())
}

/// Prints one line per draw; fails when any draw exceeds the tolerance.
pub fn cmd_gradcheck(args: &GradcheckArgs) -> Result<bool> {
    let reports = random_grad_checks(args.seed, args.draws)?;
    let worst = reports.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
    for (i, r) in reports.iter().enumerate() {
        println!(
            "draw {i}: {} parameters, max relative error {:.3e}",
            r.checked, r.max_relative_error
        );
    }
    let ok = worst <= GRADCHECK_TOLERANCE;
    println!(
        "gradcheck {}: worst {worst:.3e} (tolerance {GRADCHECK_TOLERANCE:e})",
        if ok { "passed" } else { "FAILED" }
    );
    Ok(ok)
}

pub fn cmd_curves(args: &CurvesArgs) -> Result<()> {
    let (csv, svg) = write_curves(&args.out)?;
    eprintln!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn report(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() { 2 } else { 1 })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Run(a) => cmd_run(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Gradcheck(a) => match cmd_gradcheck(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
