//! Replication harness: repeated synthetic fits with per-replication seeds,
//! aggregated into a benchmark report.
//!
//! Replications are independent and may run on any number of worker threads;
//! each derives its own generator from the master seed and results are
//! reduced in replication order, so reports are bit-identical across runs
//! and across scheduling.

use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

use crate::data::{destandardize, standardize, RawDataset, StandardizedDesign};
use crate::error::{Error, Result};
use crate::lasso::cv_lasso;
use crate::metrics::{confusion, metrics, MetricsReport};
use crate::penalty::SslHyperParams;
use crate::sim::{gen_design, gen_response, replication_seed, SimConfig};
use crate::solver::{ca, em, FitSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Ca,
    Em,
}

impl SolverChoice {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "ca" => Ok(SolverChoice::Ca),
            "em" => Ok(SolverChoice::Em),
            other => Err(Error::InvalidConfig(format!(
                "unknown solver {other:?} (expected ca or em)"
            ))),
        }
    }
}

/// Outcome of a single replication: the spike-and-slab fit and the
/// cross-validated single-rate baseline on the same data.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicationRow {
    pub rep: usize,
    pub seed: u64,
    pub ssl: MetricsReport,
    /// First ladder rung (0-based) from which the support was final.
    pub ssl_stabilized_at: Option<usize>,
    /// Baseline rate selected by 5-fold cross-validation over the same grid.
    pub lasso_lambda: f64,
    pub lasso: MetricsReport,
}

/// Mean and replication-wise standard error of one metric. The standard
/// error is the sample standard deviation across replications and is absent
/// for a single replication.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub se: Option<f64>,
}

fn summarize(values: &[f64]) -> MetricSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        Some(var.sqrt())
    } else {
        None
    };
    MetricSummary { mean, se }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MethodSummary {
    pub mse: MetricSummary,
    pub mpe: MetricSummary,
    pub model_size: MetricSummary,
    pub fdr: MetricSummary,
    pub fnr: MetricSummary,
    pub mcc: MetricSummary,
}

fn summarize_method(reports: impl Iterator<Item = MetricsReport> + Clone) -> MethodSummary {
    let collect =
        |f: fn(&MetricsReport) -> f64| -> Vec<f64> { reports.clone().map(|r| f(&r)).collect() };
    MethodSummary {
        mse: summarize(&collect(|r| r.mse)),
        mpe: summarize(&collect(|r| r.mpe)),
        model_size: summarize(&collect(|r| r.model_size as f64)),
        fdr: summarize(&collect(|r| r.fdr)),
        fnr: summarize(&collect(|r| r.fnr)),
        mcc: summarize(&collect(|r| r.mcc)),
    }
}

/// Aggregate benchmark result with the full per-replication detail.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub config: SimConfig,
    pub solver: SolverChoice,
    pub hyper: SslHyperParams,
    pub replications: usize,
    pub ssl: MethodSummary,
    pub lasso: MethodSummary,
    pub rows: Vec<ReplicationRow>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row per replication.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from(
            "rep,seed,ssl_mse,ssl_mpe,ssl_model_size,ssl_fdr,ssl_fnr,ssl_mcc,ssl_stabilized_at,\
             lasso_lambda,lasso_mse,lasso_mpe,lasso_model_size,lasso_fdr,lasso_fnr,lasso_mcc\n",
        );
        for r in &self.rows {
            let stab = r
                .ssl_stabilized_at
                .map(|s| s.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.rep,
                r.seed,
                r.ssl.mse,
                r.ssl.mpe,
                r.ssl.model_size,
                r.ssl.fdr,
                r.ssl.fnr,
                r.ssl.mcc,
                stab,
                r.lasso_lambda,
                r.lasso.mse,
                r.lasso.mpe,
                r.lasso.model_size,
                r.lasso.fdr,
                r.lasso.fnr,
                r.lasso.mcc
            ));
        }
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Simulated dataset for one replication, kept on both scales.
pub struct ReplicationData {
    pub raw: RawDataset,
    pub design: StandardizedDesign,
    pub rng: ChaCha8Rng,
    pub seed: u64,
}

/// Generates the data for replication `rep` of `config`. The returned
/// generator continues the replication's stream (used for fold assignment).
pub fn replication_data(config: &SimConfig, rep: usize) -> Result<ReplicationData> {
    let seed = replication_seed(config.seed, rep);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gen_design(config, &mut rng);
    let beta0 = config.beta0();
    let y = gen_response(&x, &beta0, config.sigma2, &mut rng);
    let names = (1..=config.p).map(|j| format!("x{j}")).collect();
    let raw = RawDataset::new(y, x, names)?;
    let design = standardize(&raw)?;
    Ok(ReplicationData {
        raw,
        design,
        rng,
        seed,
    })
}

fn run_replication(
    config: &SimConfig,
    solver: SolverChoice,
    hyper: &SslHyperParams,
    settings: &FitSettings,
    rep: usize,
) -> Result<ReplicationRow> {
    let mut data = replication_data(config, rep)?;
    let seed = data.seed;
    let beta0 = config.beta0();
    let truth = config.true_support();

    let path = match solver {
        SolverChoice::Ca => ca::fit_path(&data.design, hyper, settings),
        SolverChoice::Em => em::em_fit(&data.design, hyper, settings),
    }
    .map_err(|e| Error::Solver(format!("replication {rep} (seed {seed}): {e}")))?;
    let final_state = path.final_state();
    let (ssl_beta_raw, _) = destandardize(&final_state.beta, &data.design)?;
    let ssl_support = final_state.support();
    let ssl_counts = confusion(&ssl_support, &truth, config.p);
    let ssl_metrics = metrics(&ssl_counts, &ssl_beta_raw, &beta0, &data.raw.x)?;

    let mut perm: Vec<usize> = (0..config.n).collect();
    perm.shuffle(&mut data.rng);
    let (lasso_lambda, lasso_fit) = cv_lasso(
        &data.design,
        &hyper.lambda0_ladder,
        5,
        &perm,
        settings.tol,
        settings.max_iter.max(1000),
    );
    let (lasso_beta_raw, _) = destandardize(&lasso_fit.beta, &data.design)?;
    let lasso_support: Vec<usize> = lasso_fit
        .beta
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(j, _)| j)
        .collect();
    let lasso_counts = confusion(&lasso_support, &truth, config.p);
    let lasso_metrics = metrics(&lasso_counts, &lasso_beta_raw, &beta0, &data.raw.x)?;

    Ok(ReplicationRow {
        rep,
        seed,
        ssl: ssl_metrics,
        ssl_stabilized_at: path.stabilized_at,
        lasso_lambda,
        lasso: lasso_metrics,
    })
}

/// Runs the full replication study. Rows come back in replication order
/// regardless of the worker count.
pub fn run_benchmark(
    config: &SimConfig,
    solver: SolverChoice,
    hyper: &SslHyperParams,
    settings: &FitSettings,
) -> Result<BenchmarkReport> {
    config.validate()?;
    hyper.validate()?;
    let rows: Vec<ReplicationRow> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_replication(config, solver, hyper, settings, rep))
        .collect::<Result<Vec<_>>>()?;

    let ssl = summarize_method(rows.iter().map(|r| r.ssl));
    let lasso = summarize_method(rows.iter().map(|r| r.lasso));
    Ok(BenchmarkReport {
        config: config.clone(),
        solver,
        hyper: hyper.clone(),
        replications: config.replications,
        ssl,
        lasso,
        rows,
    })
}

/// Writes a simulated dataset (one replication) as `dataset.csv` plus a
/// `truth.json` sidecar with the generating configuration.
pub fn write_simulated_dataset(config: &SimConfig, dir: &Path) -> Result<()> {
    config.validate()?;
    let data = replication_data(config, 0)?;
    let csv_path = dir.join("dataset.csv");
    let mut file = std::fs::File::create(&csv_path).map_err(|source| Error::Io {
        path: csv_path.display().to_string(),
        source,
    })?;
    let mut out = String::from("y");
    for j in 1..=config.p {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for i in 0..config.n {
        out.push_str(&format!("{}", data.raw.y[i]));
        for j in 0..config.p {
            out.push_str(&format!(",{}", data.raw.x[[i, j]]));
        }
        out.push('\n');
    }
    file.write_all(out.as_bytes()).map_err(|source| Error::Io {
        path: csv_path.display().to_string(),
        source,
    })?;

    #[derive(Serialize)]
    struct Truth<'a> {
        config: &'a SimConfig,
        dataset_seed: u64,
        beta0: Vec<f64>,
        support: Vec<usize>,
    }
    let truth = Truth {
        config,
        dataset_seed: data.seed,
        beta0: data_beta0(config),
        support: config.true_support().iter().map(|j| j + 1).collect(),
    };
    let json_path = dir.join("truth.json");
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&truth).expect("truth serializes"),
    )
    .map_err(|source| Error::Io {
        path: json_path.display().to_string(),
        source,
    })
}

fn data_beta0(config: &SimConfig) -> Vec<f64> {
    let b: Array1<f64> = config.beta0();
    b.to_vec()
}
