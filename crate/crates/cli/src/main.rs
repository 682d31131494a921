mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Dynamic depth images from depth-map sequences, with score fusion and
/// evaluation.
#[derive(Parser, Debug)]
#[command(name = "dynapool", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    /// JSON file in the `--print-config` format.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Rank pooling regularization weight.
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Rank pooling iteration cap.
    #[arg(long, global = true)]
    iters: Option<usize>,

    /// Background removal tolerance, in normalized depth.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Mixture components per pixel.
    #[arg(long, global = true)]
    gmm_k: Option<usize>,

    /// Mixture learning rate.
    #[arg(long, global = true)]
    gmm_alpha: Option<f64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write synthetic gesture clips and a manifest.
    Synth(commands::SynthArgs),
    /// Build the six dynamic images of every manifest sequence.
    Convert(commands::ConvertArgs),
    /// Convert, train the centroid baseline, and report the recognition rate.
    Evaluate(commands::EvaluateArgs),
    /// Fuse externally produced score tables.
    Fuse(commands::FuseArgs),
}

/// Bad flag values; exits with status 1 like a parse error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Some batch items failed; exits with status 3.
#[derive(Debug)]
pub struct PartialFailure(pub String);

impl std::fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PartialFailure {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn effective_config(g: &GlobalOpts) -> anyhow::Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    let rep = &mut cfg.representation;
    if let Some(v) = g.lambda {
        rep.pooling.lambda = v;
    }
    if let Some(v) = g.iters {
        rep.pooling.max_iters = v;
    }
    if let Some(v) = g.tolerance {
        rep.histogram.tolerance = v;
    }
    if let Some(v) = g.gmm_k {
        rep.gmm.components = v;
    }
    if let Some(v) = g.gmm_alpha {
        rep.gmm.learning_rate = v;
    }
    rep.validate().map_err(|e| usage(e.to_string()))?;
    if cfg.downsample == 0 {
        return Err(usage("downsample must be at least 1"));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = effective_config(&cli.global)?;
    if cli.global.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(());
    }
    if cli.global.workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    let workers = cli
        .global
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    match cli.command {
        None => Err(usage("no command given; see --help")),
        Some(Command::Synth(a)) => commands::synth(&a, &cfg),
        Some(Command::Convert(a)) => pool.install(|| commands::convert(&a, &cfg)),
        Some(Command::Evaluate(a)) => pool.install(|| commands::evaluate(&a, &cfg)),
        Some(Command::Fuse(a)) => commands::fuse(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DYNAPOOL_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) if e.is::<PartialFailure>() => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
