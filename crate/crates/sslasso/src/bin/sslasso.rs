//! Thin command-line front end; all logic lives in the library.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use sslasso::bench::SolverChoice;
use sslasso::cli::{
    cmd_benchmark, cmd_fit, cmd_intervals, cmd_paths, cmd_simulate, resolve_out_dir, BenchmarkJob,
    FitJob, HyperSpec, IntervalsJob, LadderSpec,
};
use sslasso::error::Error;
use sslasso::inference::PrecisionMethod;
use sslasso::sim::{Preset, SimConfig};

#[derive(Parser)]
#[command(
    name = "sslasso",
    about = "Spike-and-slab LASSO: sparse regression fits, solution paths, \
             debiased intervals, and synthetic benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct HyperArgs {
    /// Slab rate (default 1)
    #[arg(long)]
    lambda1: Option<f64>,
    /// Spike-rate ladder as min:max:count, linearly spaced
    #[arg(long, value_name = "MIN:MAX:COUNT")]
    ladder: Option<String>,
    /// Beta-prior shape a (default 1)
    #[arg(long)]
    a: Option<f64>,
    /// Beta-prior shape b (default p)
    #[arg(long)]
    b: Option<f64>,
    /// Fix the noise variance at this value instead of learning it
    #[arg(long)]
    sigma2: Option<f64>,
}

impl HyperArgs {
    fn to_spec(&self) -> Result<HyperSpec, Error> {
        let ladder = match &self.ladder {
            Some(text) => Some(LadderSpec::parse(text)?),
            None => None,
        };
        Ok(HyperSpec {
            lambda1: self.lambda1,
            ladder,
            a: self.a,
            b: self.b,
            sigma2: self.sigma2,
        })
    }
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV: header row, response column named "y" first
    #[arg(long)]
    input: PathBuf,
    /// Output directory (default $SSLASSO_OUT_DIR or ".")
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Solver: ca (coordinate ascent) or em
    #[arg(long, default_value = "ca")]
    solver: String,
    /// Convergence tolerance on the max coefficient change
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap per ladder rung
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl FitArgs {
    fn to_job(&self) -> Result<FitJob, Error> {
        Ok(FitJob {
            input: self.input.clone(),
            out_dir: resolve_out_dir(self.out.clone())?,
            hyper: self.hyper.to_spec()?,
            solver: SolverChoice::parse(&self.solver)?,
            tol: self.tol,
            max_iter: self.max_iter,
        })
    }
}

#[derive(Args)]
struct SimArgs {
    /// Scenario preset: sec33 or table1
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Sparse truth as idx=value pairs, e.g. --beta 1=1.3,4=-2.5 (1-based)
    #[arg(long, value_name = "IDX=VAL,...")]
    beta: Option<String>,
    /// Noise variance of the generated response
    #[arg(long)]
    noise_sigma2: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SimArgs {
    fn to_config(&self, replications: usize) -> Result<SimConfig, Error> {
        let mut config = match &self.preset {
            Some(name) => Preset::parse(name)?.sim_config(replications, self.seed),
            None => {
                let n = self.n.ok_or_else(|| missing("--n"))?;
                let p = self.p.ok_or_else(|| missing("--p"))?;
                SimConfig {
                    n,
                    p,
                    block_size: self.block_size.unwrap_or(1),
                    rho: self.rho.unwrap_or(0.0),
                    true_beta: vec![],
                    sigma2: self.noise_sigma2.unwrap_or(1.0),
                    replications,
                    seed: self.seed,
                }
            }
        };
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(p) = self.p {
            config.p = p;
        }
        if let Some(bs) = self.block_size {
            config.block_size = bs;
        }
        if let Some(rho) = self.rho {
            config.rho = rho;
        }
        if let Some(s2) = self.noise_sigma2 {
            config.sigma2 = s2;
        }
        if let Some(spec) = &self.beta {
            config.true_beta = parse_beta_spec(spec)?;
        }
        config.seed = self.seed;
        config.replications = replications;
        config.validate()?;
        Ok(config)
    }
}

fn missing(flag: &str) -> Error {
    Error::InvalidConfig(format!("{flag} is required without --preset"))
}

fn parse_beta_spec(text: &str) -> Result<Vec<(usize, f64)>, Error> {
    text.split(',')
        .map(|pair| {
            let (idx, val) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("bad beta entry {pair:?}, expected idx=value"))
            })?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad beta index {idx:?}")))?;
            let val: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad beta value {val:?}")))?;
            Ok((idx, val))
        })
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model; writes coefficients.csv and summary.json
    Fit(FitArgs),
    /// Fit and export the ladder trajectory to path.csv
    Paths(FitArgs),
    /// Fit, debias, and write pointwise confidence intervals
    Intervals {
        #[command(flatten)]
        fit: FitArgs,
        /// Interval level: coverage is 100(1-alpha)%
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Precision estimate: nodewise or exact
        #[arg(long, default_value = "nodewise")]
        precision: String,
        /// Rate for the nodewise regressions (default sqrt(log p / n))
        #[arg(long)]
        nodewise_lambda: Option<f64>,
    },
    /// Generate a synthetic dataset plus its truth sidecar
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicated synthetic study with a cross-validated baseline
    Benchmark {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 50)]
        replications: usize,
        #[arg(long, default_value = "ca")]
        solver: String,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args.to_job()?),
        Command::Paths(args) => cmd_paths(&args.to_job()?),
        Command::Intervals {
            fit,
            alpha,
            precision,
            nodewise_lambda,
        } => {
            let method = match precision.as_str() {
                "nodewise" => PrecisionMethod::Nodewise,
                "exact" => PrecisionMethod::ExactInverse,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown precision method {other:?} (expected nodewise or exact)"
                    )))
                }
            };
            cmd_intervals(&IntervalsJob {
                fit: fit.to_job()?,
                alpha,
                method,
                nodewise_lambda,
            })
        }
        Command::Simulate { sim, out } => {
            let config = sim.to_config(1)?;
            let out_dir = resolve_out_dir(out)?;
            cmd_simulate(&config, &out_dir)
        }
        Command::Benchmark {
            sim,
            replications,
            solver,
            hyper,
            out,
            tol,
            max_iter,
        } => {
            let config = sim.to_config(replications)?;
            let solver = SolverChoice::parse(&solver)?;
            let spec = hyper.to_spec()?;
            // Presets carry their own solver settings unless overridden.
            let resolved = match (&sim.preset, &spec) {
                (Some(name), s)
                    if s.lambda1.is_none()
                        && s.ladder.is_none()
                        && s.a.is_none()
                        && s.b.is_none()
                        && s.sigma2.is_none() =>
                {
                    Preset::parse(name)?.hyper()
                }
                _ => spec.resolve(config.p)?,
            };
            cmd_benchmark(&BenchmarkJob {
                config,
                solver,
                hyper: resolved,
                out_dir: resolve_out_dir(out)?,
                tol,
                max_iter,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
