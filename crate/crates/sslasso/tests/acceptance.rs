//! End-to-end acceptance suite. Each test prints one pass/fail line with the
//! measured quantities; run with `--nocapture` to see them all:
//!
//! ```text
//! cargo test -p sslasso --test acceptance -- --nocapture
//! ```
//!
//! Every expected value asserted here is either trivial arithmetic or comes
//! from a test-local oracle (naive direct formulas, a from-scratch
//! coordinate-descent reference, restricted refits, an exact lattice
//! maximizer); none reuse the library's computation path for the quantity
//! they check.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use sslasso::bench::{replication_data, run_benchmark, BenchmarkReport, SolverChoice};
use sslasso::data::{standardize, RawDataset, StandardizedDesign};
use sslasso::inference::{
    confidence_intervals, debias, gram_matrix, precision_estimate, PrecisionMethod,
};
use sslasso::penalty::{
    g_fn, lambda_star, pen_singleton, pstar, threshold_delta, PenaltyContext, SslHyperParams,
    VarianceMode,
};
use sslasso::sim::{Preset, SimConfig};
use sslasso::solver::{ca, em, FitSettings, ThetaMode};

fn report(criterion: &str, pass: bool, details: &str) {
    println!(
        "criterion {criterion}: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {details}");
}

// ---------------------------------------------------------------------------
// test-local oracles
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct OracleParams {
    theta: f64,
    sigma2: f64,
    n: usize,
    lambda0: f64,
    lambda1: f64,
}

fn pstar_oracle(beta: f64, p: &OracleParams) -> f64 {
    1.0 / (1.0
        + (1.0 - p.theta) / p.theta
            * (p.lambda0 / p.lambda1)
            * (-beta.abs() * (p.lambda0 - p.lambda1)).exp())
}

fn lambda_star_oracle(beta: f64, p: &OracleParams) -> f64 {
    let ps = pstar_oracle(beta, p);
    p.lambda1 * ps + p.lambda0 * (1.0 - ps)
}

fn pen_oracle(beta: f64, p: &OracleParams) -> f64 {
    -p.lambda1 * beta.abs() + (pstar_oracle(0.0, p) / pstar_oracle(beta, p)).ln()
}

fn g_oracle(x: f64, p: &OracleParams) -> f64 {
    let d = lambda_star_oracle(x, p) - p.lambda1;
    d * d + 2.0 * p.n as f64 / p.sigma2 * pstar_oracle(x, p).ln()
}

fn delta_oracle(p: &OracleParams) -> f64 {
    if g_oracle(0.0, p) > 0.0 {
        (2.0 * p.n as f64 * p.sigma2 * (1.0 / pstar_oracle(0.0, p)).ln()).sqrt()
            + p.sigma2 * p.lambda1
    } else {
        p.sigma2 * lambda_star_oracle(0.0, p)
    }
}

/// From-scratch cyclic soft-thresholding reference: recomputes every partial
/// correlation directly, no incremental residual.
fn reference_lasso(design: &StandardizedDesign, weights: &[f64], sweeps: usize) -> Array1<f64> {
    let n = design.n();
    let nf = n as f64;
    let p = design.p();
    let y = design.y_c();
    let mut beta = vec![0.0f64; p];
    for _ in 0..sweeps {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let mut z = 0.0;
            for i in 0..n {
                let mut fitted = 0.0;
                for (k, bk) in beta.iter().enumerate() {
                    if k != j && *bk != 0.0 {
                        fitted += design.column(k)[i] * bk;
                    }
                }
                z += design.column(j)[i] * (y[i] - fitted);
            }
            let old = beta[j];
            let m = z.abs() - weights[j];
            let new = if m > 0.0 { m * z.signum() / nf } else { 0.0 };
            beta[j] = new;
            max_change = max_change.max((new - old).abs());
        }
        if max_change < 1e-13 {
            break;
        }
    }
    Array1::from_vec(beta)
}

fn random_regression(
    n: usize,
    p: usize,
    truth: &[(usize, f64)],
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> StandardizedDesign {
    let x = Array2::from_shape_fn((n, p), |_| {
        let v: f64 = rng.sample(rand_distr::StandardNormal);
        v
    });
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut mean = 0.0;
        for &(j, b) in truth {
            mean += x[[i, j]] * b;
        }
        let e: f64 = rng.sample(rand_distr::StandardNormal);
        y[i] = mean + sigma * e;
    }
    let raw = RawDataset::new(y, x, (1..=p).map(|j| format!("x{j}")).collect()).unwrap();
    standardize(&raw).unwrap()
}

// ---------------------------------------------------------------------------
// criterion 1: penalty calculus vs direct arithmetic
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_penalty_calculus_matches_direct_arithmetic() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-12);
    let mut max_rel = 0.0f64;
    let mut max_fd = 0.0f64;
    for _ in 0..200 {
        let params = OracleParams {
            theta: 0.02 + 0.96 * rng.random::<f64>(),
            sigma2: 0.2 + 4.8 * rng.random::<f64>(),
            n: rng.random_range(20..500),
            lambda1: 0.05 + 2.95 * rng.random::<f64>(),
            lambda0: 0.0,
        };
        let params = OracleParams {
            lambda0: params.lambda1 + 30.0 * rng.random::<f64>(),
            ..params
        };
        let ctx = PenaltyContext::new(
            params.theta,
            params.sigma2,
            params.n,
            params.lambda0,
            params.lambda1,
        );
        let beta = 8.0 * rng.random::<f64>() - 4.0;

        max_rel = max_rel.max(rel(pstar(beta, &ctx), pstar_oracle(beta, &params)));
        max_rel = max_rel.max(rel(
            lambda_star(beta, &ctx),
            lambda_star_oracle(beta, &params),
        ));
        let pen_o = pen_oracle(beta, &params);
        let pen_i = pen_singleton(beta, &ctx);
        max_rel = max_rel.max((pen_i - pen_o).abs() / pen_o.abs().max(1e-6));
        // g is a difference of two same-order terms and crosses zero, where
        // no two floating-point routes can agree to a relative tolerance on
        // the cancelled value; measure relative to the cancellation scale.
        // The log-term scale is floored because the naive oracle's ln(pstar)
        // underflows to exactly zero once pstar rounds to 1, while the
        // log-space route retains the true ~1e-16 magnitude.
        let g_scale = {
            let d = lambda_star_oracle(beta, &params) - params.lambda1;
            let log_term = 2.0 * params.n as f64 / params.sigma2
                * (pstar_oracle(beta, &params).ln().abs() + 1e-5);
            d * d + log_term
        };
        max_rel = max_rel.max((g_fn(beta, &ctx) - g_oracle(beta, &params)).abs() / g_scale);
        max_rel = max_rel.max(rel(threshold_delta(&ctx).value, delta_oracle(&params)));

        // finite-difference derivative of the penalty vs -lambda_star
        let b = 0.01 + 3.0 * rng.random::<f64>();
        let h = 1e-6;
        let fd = (pen_singleton(b + h, &ctx) - pen_singleton(b - h, &ctx)) / (2.0 * h);
        max_fd = max_fd.max((fd + lambda_star(b, &ctx)).abs());
    }

    // log-space robustness at the ladder extreme
    let extreme = PenaltyContext::new(0.05, 1.0, 1000, 1e6, 0.5);
    let mut all_finite = threshold_delta(&extreme).value.is_finite();
    for &b in &[-1e3, -1.0, 0.0, 1.0, 1e3] {
        all_finite &= pstar(b, &extreme).is_finite()
            && lambda_star(b, &extreme).is_finite()
            && pen_singleton(b, &extreme).is_finite()
            && g_fn(b, &extreme).is_finite();
    }

    let elapsed = start.elapsed();
    report(
        "1 (penalty calculus)",
        max_rel < 1e-10 && max_fd < 1e-5 && all_finite && elapsed < Duration::from_secs(1),
        &format!("max relative error {max_rel:.2e} (tol 1e-10), max |fd + lambda_star| {max_fd:.2e} (tol 1e-5), finite at lambda0=1e6: {all_finite}, elapsed {elapsed:.2?} (budget 1 s)"),
    );
}

// ---------------------------------------------------------------------------
// criterion 2: lasso reduction of both solvers
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_lasso_reduction_matches_reference() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut max_err_ca = 0.0f64;
    let mut max_err_em = 0.0f64;
    for _ in 0..50 {
        let truth = [(0, 2.0), (5, -1.5), (12, 1.0)];
        let design = random_regression(50, 20, &truth, 1.0, &mut rng);
        let lambda = 0.5 + 3.5 * rng.random::<f64>();
        let sigma2 = 0.5 + 1.5 * rng.random::<f64>();
        let hyper = SslHyperParams {
            lambda1: lambda,
            lambda0_ladder: vec![lambda],
            a: 1.0,
            b: 20.0,
            variance: VarianceMode::Fixed(sigma2),
        };
        let settings = FitSettings {
            tol: 1e-12,
            max_iter: 5000,
            theta_mode: ThetaMode::Fixed(0.3),
        };
        let ref_weights = vec![sigma2 * lambda; 20];
        let reference = reference_lasso(&design, &ref_weights, 5000);
        let ca_path = ca::fit_path(&design, &hyper, &settings).unwrap();
        let em_path = em::em_fit(&design, &hyper, &settings).unwrap();
        for j in 0..20 {
            max_err_ca = max_err_ca.max((ca_path.final_state().beta[j] - reference[j]).abs());
            max_err_em = max_err_em.max((em_path.final_state().beta[j] - reference[j]).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        "2 (lasso reduction)",
        max_err_ca < 1e-8 && max_err_em < 1e-8 && elapsed < Duration::from_secs(10),
        &format!("max |CA - reference| {max_err_ca:.2e}, max |EM - reference| {max_err_em:.2e} (tol 1e-8), 50 instances, elapsed {elapsed:.2?} (budget 10 s)"),
    );
}

// ---------------------------------------------------------------------------
// criterion 3: global-mode grid oracle
// ---------------------------------------------------------------------------

/// Upper envelope of lines y = m x + b (slopes strictly increasing),
/// queried at arbitrary x. Evaluating the envelope at x gives exactly
/// max_k (m_k x + b_k).
struct UpperEnvelope {
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
    /// breakpoints[i] is where line i overtakes line i-1.
    breakpoints: Vec<f64>,
}

impl UpperEnvelope {
    fn build(lines: &[(f64, f64)]) -> Self {
        let mut slopes: Vec<f64> = Vec::with_capacity(lines.len());
        let mut intercepts: Vec<f64> = Vec::with_capacity(lines.len());
        let x_int = |m1: f64, b1: f64, m2: f64, b2: f64| (b1 - b2) / (m2 - m1);
        for &(m, b) in lines {
            while slopes.len() >= 2 {
                let k = slopes.len();
                let x_new = x_int(slopes[k - 2], intercepts[k - 2], m, b);
                let x_old = x_int(
                    slopes[k - 2],
                    intercepts[k - 2],
                    slopes[k - 1],
                    intercepts[k - 1],
                );
                if x_new <= x_old {
                    slopes.pop();
                    intercepts.pop();
                } else {
                    break;
                }
            }
            if let Some(&last_m) = slopes.last() {
                debug_assert!(m > last_m);
                if slopes.len() == 1 {
                    // keep; breakpoint computed below
                }
            }
            slopes.push(m);
            intercepts.push(b);
        }
        let mut breakpoints = vec![f64::NEG_INFINITY; slopes.len()];
        for i in 1..slopes.len() {
            breakpoints[i] = x_int(slopes[i - 1], intercepts[i - 1], slopes[i], intercepts[i]);
        }
        UpperEnvelope {
            slopes,
            intercepts,
            breakpoints,
        }
    }

    fn query(&self, x: f64) -> f64 {
        let mut lo = 0usize;
        let mut hi = self.slopes.len() - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.breakpoints[mid] <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        self.slopes[lo] * x + self.intercepts[lo]
    }
}

/// Exact maximum of the log posterior over the step-1e-3 lattice on
/// [-5,5]^3 at fixed theta and sigma2 = 1. The beta_3 axis is folded into an
/// upper envelope of lines indexed by the lattice values, making the triple
/// loop quadratic.
#[allow(clippy::needless_range_loop)]
fn grid_maximum(design: &StandardizedDesign, params: &OracleParams) -> f64 {
    use rayon::prelude::*;
    let y = design.y_c();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let c: Vec<f64> = (0..3)
        .map(|j| {
            design
                .column(j)
                .iter()
                .zip(y.iter())
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    let mut g = [[0.0f64; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            g[j][k] = design
                .column(j)
                .iter()
                .zip(design.column(k))
                .map(|(a, b)| a * b)
                .sum();
        }
    }
    let m = 10_001usize;
    let grid: Vec<f64> = (0..m).map(|k| -5.0 + 1e-3 * k as f64).collect();
    let pen_table: Vec<f64> = grid.iter().map(|&v| pen_oracle(v, params)).collect();

    let lines: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let v = grid[k];
            (v, -0.5 * g[2][2] * v * v + pen_table[k])
        })
        .collect();
    let env = UpperEnvelope::build(&lines);
    // spot-check the envelope against the direct maximum
    let mut check_rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let x = 400.0 * check_rng.random::<f64>() - 200.0;
        let direct = lines
            .iter()
            .map(|&(mm, bb)| mm * x + bb)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((env.query(x) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    let best = (0..m)
        .into_par_iter()
        .map(|i1| {
            let b1 = grid[i1];
            let mut local = f64::NEG_INFINITY;
            for i2 in 0..m {
                let b2 = grid[i2];
                let a = c[0] * b1 + c[1] * b2
                    - 0.5 * (g[0][0] * b1 * b1 + 2.0 * g[0][1] * b1 * b2 + g[1][1] * b2 * b2)
                    + pen_table[i1]
                    + pen_table[i2];
                let bq = c[2] - g[0][2] * b1 - g[1][2] * b2;
                let total = a + env.query(bq);
                if total > local {
                    local = total;
                }
            }
            local
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    best - 0.5 * yy
}

#[test]
fn criterion_3_global_mode_matches_grid_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let theta = 0.3;
    let lambda1 = 0.1;
    let lambda0 = 10.0;
    let hyper = SslHyperParams {
        lambda1,
        lambda0_ladder: vec![0.6, 2.0, 4.0, 6.0, 8.0, 10.0],
        a: 1.0,
        b: 3.0,
        variance: VarianceMode::Fixed(1.0),
    };
    let settings = FitSettings {
        tol: 1e-10,
        max_iter: 2000,
        theta_mode: ThetaMode::Fixed(theta),
    };
    let params = OracleParams {
        theta,
        sigma2: 1.0,
        n: 20,
        lambda0,
        lambda1,
    };

    let mut max_gap = 0.0f64;
    let mut max_kkt = 0.0f64;
    for inst in 0..25 {
        let b0 = 3.0 * rng.random::<f64>() - 1.5;
        let b1 = 3.0 * rng.random::<f64>() - 1.5;
        let truth = [(0usize, b0), (1usize, b1)];
        let design = random_regression(20, 3, &truth, 1.0, &mut rng);
        let path = ca::fit_path(&design, &hyper, &settings).unwrap();
        let state = path.final_state();
        assert!(
            state.beta.iter().all(|b| b.abs() < 4.5),
            "instance {inst}: mode outside the lattice box"
        );

        let grid_max = grid_maximum(&design, &params);
        max_gap = max_gap.max((state.log_posterior - grid_max).abs());

        // self-consistency of the generalized thresholding equation
        let ctx = PenaltyContext::new(theta, 1.0, 20, lambda0, lambda1);
        let fitted = design.predict_standardized(&state.beta);
        let residual: Vec<f64> = design
            .y_c()
            .iter()
            .zip(fitted.iter())
            .map(|(a, b)| a - b)
            .collect();
        for j in 0..3 {
            let z = ca::partial_residual(j, &state.beta, &residual, &design);
            let rhs = ca::update_beta_j(z, state.beta[j], state.delta, &ctx);
            max_kkt = max_kkt.max((state.beta[j] - rhs).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        "3 (global-mode grid oracle)",
        max_gap < 1e-3 && max_kkt < 1e-8 && elapsed < Duration::from_secs(300),
        &format!("max |log-posterior gap| {max_gap:.2e} (tol 1e-3), max KKT residual {max_kkt:.2e} (tol 1e-8), 25 instances, elapsed {elapsed:.2?} (budget 5 min)"),
    );
}

// ---------------------------------------------------------------------------
// criteria 4 and 9 share the 100 seeded small-illustration datasets
// ---------------------------------------------------------------------------

struct Sec33Runs {
    ca_supports: Vec<Vec<usize>>,
    em_supports: Vec<Vec<usize>>,
    ca_lp: Vec<f64>,
    em_lp: Vec<f64>,
    max_coef_diff_on_agreement: f64,
    elapsed: Duration,
}

fn sec33_runs() -> &'static Sec33Runs {
    static RUNS: OnceLock<Sec33Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let config = Preset::Sec33.sim_config(100, 3301);
        let hyper = Preset::Sec33.hyper();
        let settings = FitSettings::default();
        let mut ca_supports = Vec::new();
        let mut em_supports = Vec::new();
        let mut ca_lp = Vec::new();
        let mut em_lp = Vec::new();
        let mut max_coef = 0.0f64;
        for rep in 0..100 {
            let data = replication_data(&config, rep).unwrap();
            let ca_path = ca::fit_path(&data.design, &hyper, &settings).unwrap();
            let em_path = em::em_fit(&data.design, &hyper, &settings).unwrap();
            if ca_path.final_state().support() == em_path.final_state().support() {
                for j in 0..12 {
                    max_coef = max_coef
                        .max((ca_path.final_state().beta[j] - em_path.final_state().beta[j]).abs());
                }
            }
            ca_supports.push(ca_path.final_state().support());
            em_supports.push(em_path.final_state().support());
            ca_lp.push(ca_path.final_state().log_posterior);
            em_lp.push(em_path.final_state().log_posterior);
        }
        Sec33Runs {
            ca_supports,
            em_supports,
            ca_lp,
            em_lp,
            max_coef_diff_on_agreement: max_coef,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_4_small_illustration_support_recovery() {
    let runs = sec33_runs();
    let exact = runs
        .ca_supports
        .iter()
        .filter(|s| **s == vec![0, 3, 6, 9])
        .count();
    // Known shortfall: across master seeds the truth is the global posterior
    // mode on only ~70-80% of datasets at these scenario parameters, so the
    // 80% bound exceeds what any mode-targeting fit can deliver reliably.
    report(
        "4 (small-illustration recovery)",
        exact >= 80 && runs.elapsed < Duration::from_secs(30),
        &format!(
            "exact support {{1,4,7,10}} on {exact}/100 seeded datasets (need >= 80), elapsed {:.2?} (budget 30 s)",
            runs.elapsed
        ),
    );
}

#[test]
fn criterion_9_ca_em_agreement() {
    let runs = sec33_runs();
    let agree = runs
        .ca_supports
        .iter()
        .zip(&runs.em_supports)
        .filter(|(a, b)| a == b)
        .count();
    let max_lp_diff = runs
        .ca_supports
        .iter()
        .zip(&runs.em_supports)
        .zip(runs.ca_lp.iter().zip(&runs.em_lp))
        .filter(|((a, b), _)| a == b)
        .map(|(_, (la, le))| (la - le).abs())
        .fold(0.0f64, f64::max);
    report(
        "9 (CA/EM agreement)",
        agree >= 95
            && max_lp_diff < 1e-2
            && runs.max_coef_diff_on_agreement < 1e-4
            && runs.elapsed < Duration::from_secs(60),
        &format!(
            "supports agree on {agree}/100 (need >= 95), max |log-posterior diff| {max_lp_diff:.2e} (tol 1e-2), max coefficient diff {:.2e} (tol 1e-4), elapsed {:.2?} (budget 1 min)",
            runs.max_coef_diff_on_agreement, runs.elapsed
        ),
    );
}

// ---------------------------------------------------------------------------
// criteria 5, 6: desk-scale benchmark and path stabilization
// ---------------------------------------------------------------------------

fn table1_benchmark() -> &'static (BenchmarkReport, Duration) {
    static REPORT: OnceLock<(BenchmarkReport, Duration)> = OnceLock::new();
    REPORT.get_or_init(|| {
        let start = Instant::now();
        let config = Preset::Table1.sim_config(50, 61001);
        let hyper = Preset::Table1.hyper();
        let report =
            run_benchmark(&config, SolverChoice::Ca, &hyper, &FitSettings::default()).unwrap();
        (report, start.elapsed())
    })
}

#[test]
fn criterion_5_desk_scale_benchmark() {
    let (report_data, elapsed) = table1_benchmark();
    let size = report_data.ssl.model_size.mean;
    let fdr = report_data.ssl.fdr.mean;
    let mcc = report_data.ssl.mcc.mean;
    let ssl_mse = report_data.ssl.mse.mean;
    let lasso_mse = report_data.lasso.mse.mean;
    report(
        "5 (desk-scale benchmark)",
        (5.0..=7.0).contains(&size)
            && fdr < 0.005
            && mcc > 0.6
            && ssl_mse < lasso_mse
            && *elapsed < Duration::from_secs(600),
        &format!(
            "model size {size:.2} (need [5,7]), fdr {fdr:.5} (need < 0.005), mcc {mcc:.3} (need > 0.6), mse {ssl_mse:.4} vs lasso {lasso_mse:.4} (need smaller), 50 replications, elapsed {elapsed:.2?} (budget 10 min)"
        ),
    );
}

#[test]
fn criterion_6_path_stabilization() {
    let (report_data, _) = table1_benchmark();
    let ladder_len = report_data.hyper.lambda0_ladder.len();
    // stabilized before the last quarter of the ladder on every replication
    let cutoff = ladder_len - ladder_len.div_ceil(4);
    let worst = report_data
        .rows
        .iter()
        .map(|r| r.ssl_stabilized_at.unwrap_or(ladder_len))
        .max()
        .unwrap();
    report(
        "6 (path stabilization)",
        worst <= cutoff,
        &format!(
            "support final from rung {worst} at the latest (need <= {cutoff} of {ladder_len} rungs)"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: debiasing identities
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_debiasing_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut max_ols_err = 0.0f64;
    let mut max_width_err = 0.0f64;
    for _ in 0..20 {
        let truth = [(0usize, 1.0), (4usize, -2.0)];
        let design = random_regression(200, 10, &truth, 1.0, &mut rng);
        let prec = precision_estimate(&design, PrecisionMethod::ExactInverse, None).unwrap();

        // OLS by solving the normal equations with dense Gauss elimination.
        let gram = gram_matrix(&design);
        let target = design.x_s().t().dot(&design.y_c()) / 200.0;
        let ols = solve_dense(&gram, &target);

        let beta_hat = Array1::from_shape_fn(10, |_| 4.0 * rng.random::<f64>() - 2.0);
        let debiased = debias(&beta_hat, &prec, &design).unwrap();
        for j in 0..10 {
            max_ols_err = max_ols_err.max((debiased[j] - ols[j]).abs());
        }

        // interval half-width vs direct arithmetic through explicit matrix
        // products
        let sigma2_hat = 1.3;
        let table = confidence_intervals(&debiased, &prec, &design, sigma2_hat, 0.05).unwrap();
        let z975 = 1.959963984540054;
        let theta_sigma = prec.theta_hat.dot(&gram);
        let cov = theta_sigma.dot(&prec.theta_hat.t());
        for (j, row) in table.rows.iter().enumerate() {
            let expect = z975 * (sigma2_hat * cov[[j, j]] / 200.0).sqrt();
            max_width_err = max_width_err.max((row.width / 2.0 - expect).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        "7 (debiasing identity)",
        max_ols_err < 1e-8 && max_width_err < 1e-8 && elapsed < Duration::from_secs(5),
        &format!("max |debiased - OLS| {max_ols_err:.2e}, max half-width error {max_width_err:.2e} (tol 1e-8), 20 instances, elapsed {elapsed:.2?} (budget 5 s)"),
    );
}

fn solve_dense(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let p = b.len();
    let mut m = a.clone();
    let mut rhs = b.clone();
    for col in 0..p {
        let mut pivot = col;
        for r in col + 1..p {
            if m[[r, col]].abs() > m[[pivot, col]].abs() {
                pivot = r;
            }
        }
        for k in 0..p {
            let tmp = m[[col, k]];
            m[[col, k]] = m[[pivot, k]];
            m[[pivot, k]] = tmp;
        }
        let tmp = rhs[col];
        rhs[col] = rhs[pivot];
        rhs[pivot] = tmp;
        let d = m[[col, col]];
        for r in 0..p {
            if r != col {
                let f = m[[r, col]] / d;
                for k in col..p {
                    m[[r, k]] -= f * m[[col, k]];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Array1::from_shape_fn(p, |j| rhs[j] / m[[j, j]])
}

// ---------------------------------------------------------------------------
// criterion 8: interval coverage at desk scale
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_interval_coverage() {
    let start = Instant::now();
    let config = SimConfig {
        n: 100,
        p: 50,
        block_size: 1,
        rho: 0.0,
        true_beta: vec![(3, 1.5), (11, -2.0), (23, 2.5), (34, -1.5), (47, 2.0)],
        sigma2: 1.0,
        replications: 200,
        seed: 0xC8,
    };
    let hyper = SslHyperParams::defaults_for(50, 1.0);
    let settings = FitSettings::default();
    let beta0 = config.beta0();
    let active: Vec<usize> = config.true_support();
    let mut covered = vec![0usize; active.len()];

    use rayon::prelude::*;
    let results: Vec<Vec<bool>> = (0..200)
        .into_par_iter()
        .map(|rep| {
            let data = replication_data(&config, rep).unwrap();
            let path = ca::fit_path(&data.design, &hyper, &settings).unwrap();
            let state = path.final_state();
            let prec = precision_estimate(&data.design, PrecisionMethod::Nodewise, None).unwrap();
            let debiased = debias(&state.beta, &prec, &data.design).unwrap();
            let table =
                confidence_intervals(&debiased, &prec, &data.design, state.sigma2, 0.05).unwrap();
            active
                .iter()
                .map(|&j| {
                    // true coefficient on the standardized scale
                    let target = beta0[j] * data.design.col_scales()[j];
                    table.rows[j].lower <= target && target <= table.rows[j].upper
                })
                .collect()
        })
        .collect();
    for flags in &results {
        for (k, &hit) in flags.iter().enumerate() {
            if hit {
                covered[k] += 1;
            }
        }
    }
    let min_cov = *covered.iter().min().unwrap();
    let elapsed = start.elapsed();
    report(
        "8 (interval coverage)",
        min_cov >= 170 && elapsed < Duration::from_secs(300),
        &format!(
            "per-signal coverage counts {covered:?} out of 200 (need >= 170 each, nominal 190), elapsed {elapsed:.2?} (budget 5 min)"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 10: benchmark determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_benchmark_determinism() {
    let start = Instant::now();
    let config = Preset::Table1.sim_config(6, 777);
    let hyper = Preset::Table1.hyper();
    let settings = FitSettings::default();
    let a = run_benchmark(&config, SolverChoice::Ca, &hyper, &settings).unwrap();
    let b = run_benchmark(&config, SolverChoice::Ca, &hyper, &settings).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let c = pool
        .install(|| run_benchmark(&config, SolverChoice::Ca, &hyper, &settings))
        .unwrap();

    let ja = a.to_json();
    let rerun_identical = ja == b.to_json();
    let serial_identical = ja == c.to_json();

    let dir = tempfile::tempdir().unwrap();
    let pa = dir.path().join("a.csv");
    let pc = dir.path().join("c.csv");
    a.write_csv(&pa).unwrap();
    c.write_csv(&pc).unwrap();
    let csv_identical = std::fs::read(&pa).unwrap() == std::fs::read(&pc).unwrap();

    let elapsed = start.elapsed();
    report(
        "10 (determinism)",
        rerun_identical && serial_identical && csv_identical && elapsed < Duration::from_secs(600),
        &format!("rerun identical: {rerun_identical}, 1-thread identical: {serial_identical}, csv bytes identical: {csv_identical}, elapsed {elapsed:.2?} (budget shared with the benchmark criterion)"),
    );
}
