//! Command-line driver: argument parsing, config layering, the experiment
//! pipelines and their file exports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contrarian_core::{Engine, Error, Scaling};

pub mod commands;
pub mod config;
pub mod reproduce;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A reproduced example did not satisfy its documented claim.
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("invalid model: {0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Config(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => {
                CliError::Config(e.to_string())
            }
            Error::NotSpanning
            | Error::PreconditionViolation(_)
            | Error::NotApplicable(_)
            | Error::NotFound(_)
            | Error::DegenerateMixture => CliError::Model(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "contrarian", version, about = "Contrarian opinion dynamics on the discrete torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form spectrum, subdominant set and regularity verdict.
    Spectrum(SpectrumArgs),
    /// Seeded simulation, with limit-orbit error under inverse-lambda scaling.
    Simulate(SimulateArgs),
    /// Limiting-orbit model, attractor sample and one agent's predicted orbit.
    Attractor(AttractorArgs),
    /// Two-set random mixture: spectrum, run, ratio decay, transition search.
    Mixed(MixedArgs),
    /// Discrepancy of the rotation-number phase sequence and dependence scan.
    Equidist(EquidistArgs),
    /// Runs one of the canned examples and checks its claim.
    Reproduce(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Simulate(_) => "simulate",
            Command::Attractor(_) => "attractor",
            Command::Mixed(_) => "mixed",
            Command::Equidist(_) => "equidist",
            Command::Reproduce(_) => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Torus side length.
    #[arg(long)]
    pub n: Option<u32>,
    /// Torus dimension (default: dimension of the points in --C).
    #[arg(long)]
    pub m: Option<u32>,
    /// Convolution set, e.g. "(1,0);(0,1)".
    #[arg(long = "C", value_name = "POINTS")]
    pub c: Option<String>,
    /// Self-confidence weight.
    #[arg(long)]
    pub p: Option<f64>,
    /// Opinion dimension.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// none | inverse-lambda | diameter-normalized
    #[arg(long, value_parser = parse_scaling)]
    pub scaling: Option<Scaling>,
    /// Keep every k-th snapshot (default: every step to 1000, then every 10th).
    #[arg(long)]
    pub stride: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// TOML config file or a manifest.json from an earlier run. Flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_scaling(s: &str) -> Result<Scaling, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    match s {
        "direct" => Ok(Engine::Direct),
        "fft" => Ok(Engine::Fft),
        other => Err(format!("unknown engine {other:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ascending p values for a rotation-number scan, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// direct | fft
    #[arg(long, value_parser = parse_engine)]
    pub engine: Option<Engine>,
}

#[derive(Debug, Clone, Args)]
pub struct AttractorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Agent whose predicted orbit is exported.
    #[arg(long)]
    pub agent: Option<usize>,
    /// Samples per phase parameter.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MixedArgs {
    #[command(flatten)]
    pub common: Common,
    /// Second convolution set.
    #[arg(long = "C2", value_name = "POINTS")]
    pub c2: Option<String>,
    /// Probability of drawing the second set.
    #[arg(long)]
    pub q: Option<f64>,
    /// Also search for the smallest q where the subdominant set grows.
    #[arg(long)]
    pub find_q: bool,
    #[arg(long)]
    pub q_lo: Option<f64>,
    #[arg(long)]
    pub q_hi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EquidistArgs {
    #[command(flatten)]
    pub common: Common,
    /// Rotation vector, comma separated. Without it the rotation numbers of
    /// the system given by --n/--C/--p are used.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Take the rotation vector from the spectrum (the default when --alpha is absent).
    #[arg(long, conflicts_with = "alpha")]
    pub from_spectrum: bool,
    /// Sequence lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<usize>>,
    /// Frequency cutoff of the Erdos-Turan-Koksma bound.
    #[arg(long = "L")]
    pub big_l: Option<u32>,
    /// Largest coefficient in the dependence scan.
    #[arg(long)]
    pub l_max: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// ex1 | ex2 | ex3 | mix-low | mix-high
    pub example: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

impl Common {
    fn flags(&self) -> RunConfig {
        RunConfig {
            n: self.n,
            m: self.m,
            c: self.c.clone(),
            p: self.p,
            d: self.d,
            seed: self.seed,
            steps: self.steps,
            scaling: self.scaling,
            stride: self.stride,
            ..RunConfig::default()
        }
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Attractor(a) => &a.common,
            Command::Mixed(a) => &a.common,
            Command::Equidist(a) => &a.common,
            Command::Reproduce(a) => &a.common,
        }
    }

    /// Flags layered over the config file, if any.
    pub fn config(&self) -> Result<RunConfig, CliError> {
        let mut flags = self.common().flags();
        match self {
            Command::Spectrum(a) => flags.p_grid = a.p_grid.clone(),
            Command::Simulate(a) => flags.engine = a.engine,
            Command::Attractor(a) => {
                flags.agent = a.agent;
                flags.resolution = a.resolution;
            }
            Command::Mixed(a) => {
                flags.c2 = a.c2.clone();
                flags.q = a.q;
                flags.find_q = a.find_q.then_some(true);
                flags.q_lo = a.q_lo;
                flags.q_hi = a.q_hi;
            }
            Command::Equidist(a) => {
                flags.alpha = a.alpha.clone();
                flags.t_grid = a.t_grid.clone();
                flags.big_l = a.big_l;
                flags.l_max = a.l_max;
            }
            Command::Reproduce(a) => flags.example = a.example.clone(),
        }
        let base = match &self.common().config {
            Some(path) => RunConfig::load(path, self.name())?,
            None => RunConfig::default(),
        };
        let mut cfg = flags.over(base);
        if let Command::Equidist(a) = self {
            if a.from_spectrum {
                cfg.alpha = None;
            }
        }
        Ok(cfg)
    }
}

/// What a finished command reports back to `main`.
#[derive(Debug)]
pub struct Outcome {
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
    pub out_dir: PathBuf,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = cli.command.config()?;
    let out_dir = cli.command.common().out_dir.clone();
    let lines = match &cli.command {
        Command::Spectrum(_) => commands::spectrum(cfg, &out_dir)?,
        Command::Simulate(_) => commands::simulate(cfg, &out_dir)?,
        Command::Attractor(_) => commands::attractor(cfg, &out_dir)?,
        Command::Mixed(_) => commands::mixed(cfg, &out_dir)?,
        Command::Equidist(_) => commands::equidist(cfg, &out_dir)?,
        Command::Reproduce(_) => reproduce::reproduce(cfg, &out_dir)?,
    };
    Ok(Outcome { lines, out_dir })
}

/// Parses `args`, runs, prints and maps the result to the process exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            for line in outcome.lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Assertion(lines)) => {
            println!("{lines}");
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
