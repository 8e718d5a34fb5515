//! File-producing command implementations behind the `sslasso` binary.
//!
//! Every command is deterministic given its configuration (and seed, for the
//! stochastic ones), and each summary echoes the fully resolved
//! configuration so a run can be replayed exactly.

use ndarray::Array1;
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::bench::{run_benchmark, write_simulated_dataset, SolverChoice};
use crate::data::{destandardize, load_dataset, standardize, StandardizedDesign};
use crate::error::{Error, Result};
use crate::inference::{confidence_intervals, debias, precision_estimate, PrecisionMethod};
use crate::penalty::{linear_ladder, SslHyperParams, VarianceMode};
use crate::sim::SimConfig;
use crate::solver::{ca, em, FitPath, FitSettings, ThetaMode};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "SSLASSO_OUT_DIR";

/// Resolves the output directory: explicit flag, then `SSLASSO_OUT_DIR`,
/// then the working directory. Creates it if needed.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir)
}

/// `min:max:count` ladder grammar with linear spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl LadderSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "ladder spec {text:?} must be min:max:count"
            )));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad ladder min {:?}", parts[0])))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad ladder max {:?}", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad ladder count {:?}", parts[2])))?;
        if count == 0 {
            return Err(Error::InvalidConfig("ladder count must be >= 1".into()));
        }
        let strictly_increasing = max > min;
        if count > 1 && !strictly_increasing {
            return Err(Error::InvalidConfig(format!(
                "ladder needs max > min, got {min}:{max}"
            )));
        }
        Ok(LadderSpec { min, max, count })
    }

    pub fn to_ladder(self) -> Vec<f64> {
        linear_ladder(self.min, self.max, self.count)
    }
}

/// Hyperparameter overrides; anything left `None` falls back to the library
/// defaults once the data dimension is known.
#[derive(Debug, Clone, Default)]
pub struct HyperSpec {
    pub lambda1: Option<f64>,
    pub ladder: Option<LadderSpec>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Fixed noise variance; `None` means unknown-variance mode.
    pub sigma2: Option<f64>,
}

impl HyperSpec {
    pub fn resolve(&self, p: usize) -> Result<SslHyperParams> {
        let lambda1 = self.lambda1.unwrap_or(1.0);
        let mut hyper = SslHyperParams::defaults_for(p, lambda1);
        if let Some(spec) = self.ladder {
            hyper.lambda0_ladder = spec.to_ladder();
        }
        if let Some(a) = self.a {
            hyper.a = a;
        }
        if let Some(b) = self.b {
            hyper.b = b;
        }
        if let Some(s2) = self.sigma2 {
            hyper.variance = VarianceMode::Fixed(s2);
        }
        hyper.validate()?;
        Ok(hyper)
    }
}

/// Common options for the fitting commands.
#[derive(Debug, Clone)]
pub struct FitJob {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub hyper: HyperSpec,
    pub solver: SolverChoice,
    pub tol: f64,
    pub max_iter: usize,
}

impl FitJob {
    fn settings(&self) -> FitSettings {
        FitSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            theta_mode: ThetaMode::Adaptive,
        }
    }
}

pub struct FittedModel {
    pub design: StandardizedDesign,
    pub hyper: SslHyperParams,
    pub path: FitPath,
}

fn fit_input(job: &FitJob) -> Result<FittedModel> {
    let raw = load_dataset(&job.input)?;
    let design = standardize(&raw)?;
    let hyper = job.hyper.resolve(design.p())?;
    let settings = job.settings();
    let path = match job.solver {
        SolverChoice::Ca => ca::fit_path(&design, &hyper, &settings)?,
        SolverChoice::Em => em::em_fit(&design, &hyper, &settings)?,
    };
    Ok(FittedModel {
        design,
        hyper,
        path,
    })
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    input: String,
    n: usize,
    p: usize,
    solver: SolverChoice,
    hyper: &'a SslHyperParams,
    tol: f64,
    max_iter: usize,
    theta_hat: f64,
    sigma2_hat: f64,
    sigma2_floored: bool,
    intercept: f64,
    /// 1-based indices of the selected coordinates.
    support: Vec<usize>,
    support_names: Vec<String>,
    final_lambda0: f64,
    log_posterior: f64,
    iterations_per_rung: Vec<usize>,
    converged_per_rung: Vec<bool>,
    /// 0-based index into the ladder, if the support stabilized.
    stabilized_at: Option<usize>,
    /// 0-based index of the first rung fitted with the variance updating.
    sigma2_unfrozen_at: Option<usize>,
}

/// Fits the dataset and writes `coefficients.csv` and `summary.json`.
pub fn cmd_fit(job: &FitJob) -> Result<()> {
    let model = fit_input(job)?;
    write_fit_outputs(job, &model)
}

fn write_fit_outputs(job: &FitJob, model: &FittedModel) -> Result<()> {
    let state = model.path.final_state();
    let (beta_raw, intercept) = destandardize(&state.beta, &model.design)?;

    let coef_path = job.out_dir.join("coefficients.csv");
    let mut out = String::from("index,name,beta_raw,beta_std,selected\n");
    for j in 0..model.design.p() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            j + 1,
            model.design.column_names()[j],
            beta_raw[j],
            state.beta[j],
            u8::from(state.beta[j] != 0.0)
        ));
    }
    std::fs::write(&coef_path, out).map_err(|source| Error::Io {
        path: coef_path.display().to_string(),
        source,
    })?;

    let support: Vec<usize> = state.support().iter().map(|j| j + 1).collect();
    let support_names = state
        .support()
        .iter()
        .map(|&j| model.design.column_names()[j].clone())
        .collect();
    let summary = SummaryJson {
        input: job.input.display().to_string(),
        n: model.design.n(),
        p: model.design.p(),
        solver: job.solver,
        hyper: &model.hyper,
        tol: job.tol,
        max_iter: job.max_iter,
        theta_hat: state.theta,
        sigma2_hat: state.sigma2,
        sigma2_floored: state.sigma2_floored,
        intercept,
        support,
        support_names,
        final_lambda0: model.path.final_lambda0(),
        log_posterior: state.log_posterior,
        iterations_per_rung: model
            .path
            .rungs
            .iter()
            .map(|r| r.state.iterations)
            .collect(),
        converged_per_rung: model.path.rungs.iter().map(|r| r.state.converged).collect(),
        stabilized_at: model.path.stabilized_at,
        sigma2_unfrozen_at: model.path.sigma2_unfrozen_at,
    };
    let summary_path = job.out_dir.join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|source| Error::Io {
        path: summary_path.display().to_string(),
        source,
    })
}

/// Fits the dataset and writes the ladder trajectory to `path.csv`, one row
/// per (rung, coordinate), sorted by rung then coordinate.
pub fn cmd_paths(job: &FitJob) -> Result<()> {
    let model = fit_input(job)?;
    let path_csv = job.out_dir.join("path.csv");
    let mut out = String::from("lambda0,index,beta_std\n");
    for rung in &model.path.rungs {
        for j in 0..model.design.p() {
            out.push_str(&format!(
                "{},{},{}\n",
                rung.lambda0,
                j + 1,
                rung.state.beta[j]
            ));
        }
    }
    std::fs::write(&path_csv, out).map_err(|source| Error::Io {
        path: path_csv.display().to_string(),
        source,
    })?;
    write_fit_outputs(job, &model)
}

#[derive(Debug, Clone)]
pub struct IntervalsJob {
    pub fit: FitJob,
    pub alpha: f64,
    pub method: PrecisionMethod,
    pub nodewise_lambda: Option<f64>,
}

/// Fits, debiases the final mode, and writes `intervals.csv`.
pub fn cmd_intervals(job: &IntervalsJob) -> Result<()> {
    let model = fit_input(&job.fit)?;
    let state = model.path.final_state();
    let prec = precision_estimate(&model.design, job.method, job.nodewise_lambda)?;
    let beta_d = debias(&state.beta, &prec, &model.design)?;
    let table = confidence_intervals(&beta_d, &prec, &model.design, state.sigma2, job.alpha)?;
    table.write_csv(&job.fit.out_dir.join("intervals.csv"), job.method)?;
    write_fit_outputs(&job.fit, &model)
}

/// Writes one simulated dataset plus its generating truth.
pub fn cmd_simulate(config: &SimConfig, out_dir: &Path) -> Result<()> {
    write_simulated_dataset(config, out_dir)
}

#[derive(Debug, Clone)]
pub struct BenchmarkJob {
    pub config: SimConfig,
    pub solver: SolverChoice,
    pub hyper: SslHyperParams,
    pub out_dir: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
}

/// Runs the replication study and writes `benchmark.json` and
/// `replications.csv`.
pub fn cmd_benchmark(job: &BenchmarkJob) -> Result<()> {
    let settings = FitSettings {
        tol: job.tol,
        max_iter: job.max_iter,
        theta_mode: ThetaMode::Adaptive,
    };
    let report = run_benchmark(&job.config, job.solver, &job.hyper, &settings)?;
    let json_path = job.out_dir.join("benchmark.json");
    std::fs::write(&json_path, report.to_json()).map_err(|source| Error::Io {
        path: json_path.display().to_string(),
        source,
    })?;
    report.write_csv(&job.out_dir.join("replications.csv"))
}

/// Convenience for tests and examples: standardized-scale coefficients of
/// the final rung.
pub fn final_beta(model: &FittedModel) -> Array1<f64> {
    model.path.final_state().beta.clone()
}
