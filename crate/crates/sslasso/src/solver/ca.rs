//! Coordinate ascent for the spike-and-slab LASSO posterior mode.
//!
//! Each outer iteration recomputes the selection threshold, runs one cyclic
//! sweep of the generalized thresholding update
//!
//! ```text
//! beta_j <- (1/n) (|z_j| - sigma2 lambda_star(beta_j))_+ sign(z_j) 1(|z_j| > delta)
//! ```
//!
//! then refreshes the mixing weight from the nonzero count and the variance
//! from the residual sum of squares. `z_j` is the partial-residual
//! correlation, maintained incrementally through a running full residual.
//! After convergence a short polishing phase re-sweeps the coefficients with
//! all scalars frozen so the returned iterate satisfies the thresholding
//! fixed-point equation to well below reporting tolerances.

use ndarray::Array1;

use crate::data::StandardizedDesign;
use crate::error::{Error, Result};
use crate::lasso::{axpy, dot};
use crate::penalty::{lambda_star, threshold_delta, PenaltyContext, SslHyperParams, VarianceMode};
use crate::solver::{log_posterior, FitPath, FitSettings, RungFit, SolverState, ThetaMode};

/// Partial-residual correlation `z_j = x_j^T (y - sum_{k != j} x_k beta_k)`,
/// computed as `x_j^T r + n beta_j` from the maintained full residual `r`.
pub fn partial_residual(
    j: usize,
    beta: &Array1<f64>,
    residual: &[f64],
    design: &StandardizedDesign,
) -> f64 {
    dot(design.column(j), residual) + design.n() as f64 * beta[j]
}

/// Generalized thresholding update for a single coordinate. Returns zero
/// whenever `|z_j|` does not exceed the selection threshold; otherwise a
/// soft-thresholding step at the adaptive rate evaluated at the coordinate's
/// current value.
pub fn update_beta_j(z_j: f64, beta_j_old: f64, delta: f64, ctx: &PenaltyContext) -> f64 {
    if z_j.abs() <= delta {
        return 0.0;
    }
    let shrink = ctx.sigma2 * lambda_star(beta_j_old, ctx);
    let mag = z_j.abs() - shrink;
    if mag > 0.0 {
        mag * z_j.signum() / ctx.n as f64
    } else {
        0.0
    }
}

/// Conditional-mean update of the mixing weight: `(a + count) / (a + b + p)`.
pub fn update_theta(nonzero_count: usize, a: f64, b: f64, p: usize) -> f64 {
    (a + nonzero_count as f64) / (a + b + p as f64)
}

/// Variance update `rss / (n + 2)`, guarded below by `floor`. The flag
/// reports whether the guard was the binding value.
pub fn update_sigma2(residual_ss: f64, n: usize, floor: f64) -> (f64, bool) {
    let raw = residual_ss / (n as f64 + 2.0);
    if raw < floor {
        (floor, true)
    } else {
        (raw, false)
    }
}

struct SweepOutcome {
    max_change: f64,
    nonzero: usize,
}

fn sweep(
    cols: &[&[f64]],
    n: usize,
    beta: &mut Array1<f64>,
    residual: &mut [f64],
    delta: f64,
    ctx: &PenaltyContext,
) -> SweepOutcome {
    let nf = n as f64;
    let mut max_change = 0.0f64;
    let mut nonzero = 0usize;
    for (j, col) in cols.iter().enumerate() {
        let old = beta[j];
        let z = dot(col, residual) + nf * old;
        let new = update_beta_j(z, old, delta, ctx);
        if new != old {
            axpy(old - new, col, residual);
            beta[j] = new;
            let change = (new - old).abs();
            if change > max_change {
                max_change = change;
            }
        }
        if new != 0.0 {
            nonzero += 1;
        }
    }
    SweepOutcome {
        max_change,
        nonzero,
    }
}

fn refresh_residual(cols: &[&[f64]], y: &[f64], beta: &Array1<f64>, residual: &mut Vec<f64>) {
    residual.clear();
    residual.extend_from_slice(y);
    for (j, col) in cols.iter().enumerate() {
        if beta[j] != 0.0 {
            axpy(-beta[j], col, residual);
        }
    }
}

/// Solves the posterior mode at a single spike rate, starting from `init`.
/// `update_variance` enables the per-iteration variance refresh (disabled
/// for fixed-variance runs and while the ladder keeps the variance frozen).
pub fn fit_at_rung(
    design: &StandardizedDesign,
    hyper: &SslHyperParams,
    lambda0: f64,
    init: &SolverState,
    update_variance: bool,
    settings: &FitSettings,
) -> Result<SolverState> {
    let n = design.n();
    let p = design.p();
    let nf = n as f64;
    let cols: Vec<&[f64]> = (0..p).map(|j| design.column(j)).collect();
    let y = design.y_c();
    let y = y.as_slice().expect("contiguous response");

    let mut beta = init.beta.clone();
    let mut theta = match settings.theta_mode {
        ThetaMode::Fixed(t) => t,
        ThetaMode::Adaptive => init.theta,
    };
    let mut sigma2 = init.sigma2;
    let mut sigma2_floored = init.sigma2_floored;
    let sigma2_floor = 1e-10 * design.y_c_norm2() / nf;

    let mut residual = Vec::with_capacity(n);
    refresh_residual(&cols, y, &beta, &mut residual);

    // Bring the variance in line with the warm-start coefficients before the
    // first threshold is computed. At the rung where the variance thaws, the
    // carried-in value is the inflated null-model initialization; thresholding
    // with it would wipe the warm-start support before the first scheduled
    // variance update could correct it.
    if update_variance {
        let rss: f64 = residual.iter().map(|r| r * r).sum();
        let (s2, floored) = update_sigma2(rss, n, sigma2_floor);
        sigma2 = s2;
        sigma2_floored = floored;
    }

    let mut iterations = 0usize;
    let mut converged = false;
    let mut delta = 0.0f64;

    while iterations < settings.max_iter {
        iterations += 1;
        let ctx = PenaltyContext::new(theta, sigma2, n, lambda0, hyper.lambda1);
        delta = threshold_delta(&ctx).value;
        let outcome = sweep(&cols, n, &mut beta, &mut residual, delta, &ctx);
        if let ThetaMode::Adaptive = settings.theta_mode {
            theta = update_theta(outcome.nonzero, hyper.a, hyper.b, p);
        }
        if update_variance {
            let rss: f64 = residual.iter().map(|r| r * r).sum();
            let (s2, floored) = update_sigma2(rss, n, sigma2_floor);
            sigma2 = s2;
            sigma2_floored = floored;
        }
        if iterations.is_multiple_of(64) {
            refresh_residual(&cols, y, &beta, &mut residual);
        }
        if outcome.max_change < settings.tol {
            converged = true;
            break;
        }
    }

    // Polish: re-sweep with (theta, sigma2, delta) frozen until the iterate
    // is a fixed point of the thresholding map. If the support shifts (a
    // correlation sitting on the threshold), resume the main loop so the
    // scalar updates see the new support.
    let polish_tol = (settings.tol * 1e-6).max(1e-15);
    for _ in 0..3 {
        refresh_residual(&cols, y, &beta, &mut residual);
        let ctx = PenaltyContext::new(theta, sigma2, n, lambda0, hyper.lambda1);
        delta = threshold_delta(&ctx).value;
        let support_before: Vec<usize> = crate::solver::support_of(&beta);
        for _ in 0..100 {
            let outcome = sweep(&cols, n, &mut beta, &mut residual, delta, &ctx);
            if outcome.max_change < polish_tol {
                break;
            }
        }
        if crate::solver::support_of(&beta) == support_before {
            break;
        }
        if let ThetaMode::Adaptive = settings.theta_mode {
            let nz = beta.iter().filter(|&&v| v != 0.0).count();
            theta = update_theta(nz, hyper.a, hyper.b, p);
        }
        if update_variance {
            let rss: f64 = residual.iter().map(|r| r * r).sum();
            let (s2, floored) = update_sigma2(rss, n, sigma2_floor);
            sigma2 = s2;
            sigma2_floored = floored;
        }
    }

    let lp = log_posterior(design, &beta, sigma2, lambda0, hyper, settings.theta_mode);
    if !lp.is_finite() {
        return Err(Error::Solver(format!(
            "non-finite log posterior at lambda0 = {lambda0}"
        )));
    }

    Ok(SolverState {
        beta,
        theta,
        sigma2,
        delta,
        iterations,
        converged,
        sigma2_floored,
        log_posterior: lp,
    })
}

/// Initial state shared by both solvers: zero coefficients, prior-mean
/// mixing weight, null-model variance (or the fixed value).
pub(crate) fn initial_state(
    design: &StandardizedDesign,
    hyper: &SslHyperParams,
    settings: &FitSettings,
) -> SolverState {
    let theta0 = match settings.theta_mode {
        ThetaMode::Fixed(t) => t,
        ThetaMode::Adaptive => hyper.a / (hyper.a + hyper.b),
    };
    let sigma2_0 = match hyper.variance {
        VarianceMode::Fixed(v) => v,
        VarianceMode::Unknown => design.y_c_norm2() / (design.n() as f64 + 2.0),
    };
    SolverState::init(design.p(), theta0, sigma2_0)
}

/// Ladder threshold below which a rung counts as "converging fast" for the
/// purpose of unfreezing the variance.
pub(crate) const FAST_CONVERGENCE_ITERS: usize = 100;

/// Fits the whole spike-rate ladder with warm starts. In unknown-variance
/// mode the variance stays frozen at its initial value until the first rung
/// that converges in fewer than 100 iterations; it is updated from the next
/// rung on.
pub fn fit_path(
    design: &StandardizedDesign,
    hyper: &SslHyperParams,
    settings: &FitSettings,
) -> Result<FitPath> {
    hyper.validate()?;
    if let ThetaMode::Fixed(t) = settings.theta_mode {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fixed theta must lie in (0,1), got {t}"
            )));
        }
    }

    let mut state = initial_state(design, hyper, settings);
    let mut frozen = true;
    let mut sigma2_unfrozen_at = None;
    let mut rungs = Vec::with_capacity(hyper.lambda0_ladder.len());

    for (s, &lambda0) in hyper.lambda0_ladder.iter().enumerate() {
        let update_variance = match hyper.variance {
            VarianceMode::Fixed(_) => false,
            VarianceMode::Unknown => !frozen,
        };
        if update_variance && sigma2_unfrozen_at.is_none() {
            sigma2_unfrozen_at = Some(s);
        }
        state = fit_at_rung(design, hyper, lambda0, &state, update_variance, settings)?;
        if frozen && state.converged && state.iterations < FAST_CONVERGENCE_ITERS {
            frozen = false;
        }
        rungs.push(RungFit {
            lambda0,
            state: state.clone(),
        });
    }

    let stabilized_at = FitPath::compute_stabilized_at(&rungs);
    Ok(FitPath {
        rungs,
        stabilized_at,
        sigma2_unfrozen_at,
    })
}
