//! Command-line front end.
//!
//! Exit status is 0 on success, 1 on usage or I/O errors and 2 when an
//! optimality certification fails.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bloch::{build_quadrature, uniform_sample, PolVec};
use crate::error::{Error, Result};
use crate::figures::{self, FigureConfig, Sweep, Table};
use crate::fockspace::{operator_quadrature_degree, MlCertifier};
use crate::greedy::GreedySimulator;
use crate::mc::with_workers;
use crate::photon_stats::PhotonDistribution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "polarimetry",
    version,
    about = "Optimal polarization estimation for light with arbitrary photon statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Poisson likelihood over mean photon number and fidelity
    Likelihood,
    /// Success probabilities within a cap of half-angle --epsilon
    Fig2,
    /// Mean fidelities
    Fig3,
    /// Mean fidelities with one-standard-deviation bands
    Fig4,
    /// Certify the optimality conditions at --count random polarizations
    Verify,
    /// Run one greedy trial and print its measurement record
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistName {
    Fock,
    Poisson,
    Thermal,
}

/// `fock`, `poisson`, `thermal` or `custom:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistArg {
    Named(DistName),
    Custom(PathBuf),
}

fn parse_dist(s: &str) -> std::result::Result<DistArg, String> {
    if let Some(path) = s.strip_prefix("custom:") {
        if path.is_empty() {
            return Err("custom distribution needs a path, e.g. custom:weights.txt".into());
        }
        return Ok(DistArg::Custom(PathBuf::from(path)));
    }
    DistName::from_str(s, true)
        .map(DistArg::Named)
        .map_err(|_| {
            format!("unknown distribution `{s}`; expected fock, poisson, thermal or custom:<path>")
        })
}

fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, clap::Args)]
pub struct Options {
    /// Photon statistics
    #[arg(long, global = true, default_value = "poisson", value_parser = parse_dist)]
    pub dist: DistArg,
    /// Photon number (fock) or mean photon number (poisson, thermal)
    #[arg(long, global = true, default_value_t = 1.0)]
    pub param: f64,
    /// Cap half-angle in radians
    #[arg(long, global = true, default_value_t = 0.2 * PI)]
    pub epsilon: f64,
    /// Photon-number grid start:stop:step (default 0:30:0.5, or 0:20:1 for likelihood)
    #[arg(long, global = true, value_parser = parse_sweep)]
    pub sweep: Option<Sweep>,
    /// Fidelity grid for the likelihood table
    #[arg(long, global = true, value_parser = parse_sweep, default_value = "0:1:0.05")]
    pub u_sweep: Sweep,
    /// Greedy Monte Carlo trials per grid point (0 skips the greedy columns)
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Random polarizations checked by verify
    #[arg(long, global = true, default_value_t = 20)]
    pub count: usize,
    /// Fock-space truncation for verify (default: the distribution's truncation index)
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Truncation tail of the photon-number distribution
    #[arg(long, global = true, default_value_t = crate::photon_stats::DEFAULT_TRUNCATION_TAIL)]
    pub tail: f64,
    /// Scale this photon-number block of the POVM (negative control for verify)
    #[arg(long, global = true)]
    pub corrupt_block: Option<usize>,
    #[arg(long, global = true, default_value_t = 1.01)]
    pub corrupt_factor: f64,
    /// Photon number for trace
    #[arg(long, global = true, default_value_t = 10)]
    pub photons: usize,
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub opts: Options,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        Self {
            command: cli.command,
            opts: cli.opts,
        }
    }

    pub fn distribution(&self) -> Result<PhotonDistribution> {
        let o = &self.opts;
        let dist = match &o.dist {
            DistArg::Custom(path) => PhotonDistribution::from_weights_file(path)?,
            DistArg::Named(DistName::Fock) => {
                if o.param < 0.0 || o.param.fract() != 0.0 || o.param > u32::MAX as f64 {
                    return Err(Error::Config(format!(
                        "fock needs a non-negative integer photon number, got {}",
                        o.param
                    )));
                }
                PhotonDistribution::fock(o.param as u32)
            }
            DistArg::Named(DistName::Poisson) => PhotonDistribution::poisson(o.param)?,
            DistArg::Named(DistName::Thermal) => PhotonDistribution::thermal(o.param)?,
        };
        dist.with_tail(o.tail)
    }

    pub fn figure_config(&self) -> Result<FigureConfig> {
        let o = &self.opts;
        if !(o.epsilon.is_finite() && (0.0..=PI).contains(&o.epsilon)) {
            return Err(Error::Config(format!(
                "epsilon {} must lie in [0, π]",
                o.epsilon
            )));
        }
        let base = if self.command == Command::Likelihood {
            FigureConfig::likelihood_default()
        } else {
            FigureConfig::default()
        };
        Ok(FigureConfig {
            epsilon: o.epsilon,
            sweep: o.sweep.unwrap_or(base.sweep),
            u_sweep: o.u_sweep,
            trials: o.trials,
            seed: o.seed,
        })
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let config = RunConfig::from_cli(cli);
    match execute(&config, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs a parsed configuration, writing to `--out` or `stdout`.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    match &config.opts.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            let code = dispatch(config, &mut file)?;
            file.flush()?;
            Ok(code)
        }
        None => dispatch(config, stdout),
    }
}

fn dispatch(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let mut figure = |build: fn(&FigureConfig) -> Result<Table>| -> Result<i32> {
        let cfg = config.figure_config()?;
        let table = with_workers(config.opts.workers, || build(&cfg))??;
        table.write_csv(&mut *out)?;
        Ok(EXIT_OK)
    };
    match config.command {
        Command::Likelihood => figure(figures::likelihood_table),
        Command::Fig2 => figure(figures::fig2_table),
        Command::Fig3 => figure(figures::fig3_table),
        Command::Fig4 => figure(figures::fig4_table),
        Command::Verify => verify(config, out),
        Command::Trace => trace(config, out),
    }
}

fn verify(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let o = &config.opts;
    let dist = config.distribution()?;
    let n_max = o.n_max.unwrap_or_else(|| dist.truncation_index());
    let quad = build_quadrature(operator_quadrature_degree(n_max))?;
    let certifier = match o.corrupt_block {
        Some(block) => {
            MlCertifier::with_corrupted_block(&dist, n_max, &quad, block, o.corrupt_factor)?
        }
        None => MlCertifier::new(&dist, n_max, &quad)?,
    };
    writeln!(
        out,
        "# verify dist={} n_max={} count={} seed={}",
        dist.label(),
        n_max,
        o.count,
        o.seed
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut failures = 0;
    for k in 0..o.count {
        let r = uniform_sample(&mut rng);
        let report = certifier.certify(&r);
        if !report.passes() {
            failures += 1;
        }
        writeln!(out, "r[{k}] theta={} phi={} {report}", r.theta(), r.phi())?;
    }
    writeln!(out, "failures={failures}/{}", o.count)?;
    Ok(if failures == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn trace(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let o = &config.opts;
    let sim = GreedySimulator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let truth: PolVec = uniform_sample(&mut rng);
    let result = sim.run_trial(o.photons, &truth, &mut rng)?;
    writeln!(
        out,
        "# trace photons={} seed={} truth_theta={} truth_phi={} estimate_theta={} estimate_phi={} fidelity={} random_estimate={}",
        o.photons,
        o.seed,
        truth.theta(),
        truth.phi(),
        result.estimate.theta(),
        result.estimate.phi(),
        result.fidelity,
        result.trace.random_estimate
    )?;
    out.write_all(result.trace.to_records().as_bytes())?;
    Ok(EXIT_OK)
}
