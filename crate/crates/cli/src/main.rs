//! `permuton`: sampling-entropy experiments on permutons.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// A refusal on validation grounds (exit code 2).
#[derive(Debug)]
pub struct Refusal(pub String);

impl std::fmt::Display for Refusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Refusal {}

#[derive(Parser)]
#[command(name = "permuton", version, about = "Sampling-entropy experiments on permutons")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct Global {
    /// Seed for every random stream; required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: `out`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Allow plug-in estimates at pattern lengths above 7.
    #[arg(long, global = true)]
    pub allow_biased: bool,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Global {
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn require_seed(&self) -> anyhow::Result<u64> {
        self.seed.ok_or_else(|| Refusal("this command is stochastic: pass --seed".into()).into())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Entropy curve H_n of a permuton, exact or estimated.
    EntropyCurve(commands::EntropyCurveArgs),
    /// Mean entropy curves of random tree permutons and the implied ρ_n.
    TreeExperiment(commands::TreeArgs),
    /// Binomial decay table, log-periodic profile and Fourier limit.
    Decay(commands::DecayArgs),
    /// Roots of (s)_{d−1} = d! and hypergeometric residuals.
    Roots(commands::RootsArgs),
    /// Draw pattern samples from a permuton.
    Sample(commands::SampleArgs),
    /// Grid lower bound on the box distance of two permutons.
    BoxDistance(commands::BoxDistanceArgs),
    /// Membership in the substitution class generated by a set of permutations.
    ClassCheck(commands::ClassCheckArgs),
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(pe) = cause.downcast_ref::<permuton_core::Error>() {
            return if pe.is_numerical() { 3 } else { 2 };
        }
        if cause.downcast_ref::<Refusal>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.global.config {
        Some(p) => config::load(p)?,
        None => Default::default(),
    };
    let global = config::merge(&cli.global, &file)?;
    if let Some(t) = global.threads {
        if t == 0 {
            return Err(Refusal("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::EntropyCurve(a) => commands::entropy_curve(&global, config::merge(&a, &file)?),
        Command::TreeExperiment(a) => commands::tree_experiment(&global, config::merge(&a, &file)?),
        Command::Decay(a) => commands::decay(&global, config::merge(&a, &file)?),
        Command::Roots(a) => commands::roots(&global, config::merge(&a, &file)?),
        Command::Sample(a) => commands::sample(&global, config::merge(&a, &file)?),
        Command::BoxDistance(a) => commands::box_distance(&global, config::merge(&a, &file)?),
        Command::ClassCheck(a) => commands::class_check(&global, config::merge(&a, &file)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
