//! EM implementation of the spike-and-slab LASSO.
//!
//! The mixture indicators are treated as missing data. The E-step fills in
//! their conditional expectations (the slab probabilities of the current
//! coefficients); the M-step solves an adaptive LASSO with per-coordinate
//! penalties `sigma2 * lambda_star(beta_j)` by coordinate descent, then
//! refreshes the mixing weight and the variance. Unlike the generalized
//! thresholding solver this loop never consults the selection threshold,
//! which makes the same scheme portable to non-Gaussian likelihoods.

use ndarray::Array1;

use crate::data::StandardizedDesign;
use crate::error::{Error, Result};
use crate::lasso::weighted_lasso;
use crate::penalty::{
    lambda_star, pstar, threshold_delta, PenaltyContext, SslHyperParams, VarianceMode,
};
use crate::solver::{ca, log_posterior, FitPath, FitSettings, RungFit, SolverState, ThetaMode};

const THETA_CLAMP: f64 = 1e-12;

/// EM iterate; `responsibilities[j]` is the conditional slab probability of
/// `beta[j]` under the current mixing weight and rates.
#[derive(Debug, Clone)]
pub struct EmState {
    pub beta: Array1<f64>,
    pub theta: f64,
    pub sigma2: f64,
    pub responsibilities: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// E-step: elementwise slab probability of the current coefficients.
pub fn e_step(beta: &Array1<f64>, ctx: &PenaltyContext) -> Array1<f64> {
    beta.mapv(|b| pstar(b, ctx))
}

/// M-step for the coefficients: weighted LASSO at the given per-coordinate
/// penalties, warm-started from `init`.
pub fn m_step_beta(
    design: &StandardizedDesign,
    weights: &[f64],
    init: Option<&Array1<f64>>,
    tol: f64,
    max_iter: usize,
) -> Array1<f64> {
    weighted_lasso(design, weights, init, tol, max_iter).beta
}

/// M-step for the mixing weight:
/// `(sum_j responsibilities_j + a - 1) / (a + b + p - 2)`, clamped away from
/// the boundary so log-space penalty evaluations stay finite.
pub fn m_step_theta(responsibilities: &Array1<f64>, a: f64, b: f64, p: usize) -> f64 {
    let raw = (responsibilities.sum() + a - 1.0) / (a + b + p as f64 - 2.0);
    raw.clamp(THETA_CLAMP, 1.0 - THETA_CLAMP)
}

/// EM at a single spike rate, starting from `init`.
pub fn em_at_rung(
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
    let sigma2_floor = 1e-10 * design.y_c_norm2() / nf;
    let inner_tol = settings.tol / 10.0;
    let inner_max = settings.max_iter.max(1000);

    let mut beta = init.beta.clone();
    let mut theta = match settings.theta_mode {
        ThetaMode::Fixed(t) => t,
        ThetaMode::Adaptive => init.theta,
    };
    let mut sigma2 = init.sigma2;
    let mut sigma2_floored = init.sigma2_floored;

    // Same rung-entry variance refresh as the thresholding solver: the
    // adaptive weights sigma2 * lambda_star would otherwise be computed from
    // the stale frozen value on the rung where the variance thaws.
    if update_variance {
        let fitted = design.predict_standardized(&beta);
        let rss: f64 = design
            .y_c()
            .iter()
            .zip(fitted.iter())
            .map(|(y, f)| (y - f) * (y - f))
            .sum();
        let (s2, floored) = ca::update_sigma2(rss, n, sigma2_floor);
        sigma2 = s2;
        sigma2_floored = floored;
    }

    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < settings.max_iter {
        iterations += 1;
        let ctx = PenaltyContext::new(theta, sigma2, n, lambda0, hyper.lambda1);
        let weights: Vec<f64> = beta
            .iter()
            .map(|&bj| sigma2 * lambda_star(bj, &ctx))
            .collect();
        let new_beta = m_step_beta(design, &weights, Some(&beta), inner_tol, inner_max);

        let max_change = beta
            .iter()
            .zip(new_beta.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        beta = new_beta;

        if let ThetaMode::Adaptive = settings.theta_mode {
            let resp = e_step(&beta, &ctx);
            // Floor the iterate at the empty-model posterior mean. Early in
            // the ladder the two rates barely separate, every responsibility
            // is near zero, and the bare M-step would drive theta to its
            // clamp; from there the spike absorbs even strong coefficients
            // and the empty fit becomes absorbing. The floor is the same
            // sparsity level the thresholding solver reports for an empty
            // support, and the iterate escapes it as soon as the rates
            // separate enough for the responsibilities to become
            // informative.
            let floor = hyper.a / (hyper.a + hyper.b + p as f64);
            theta = m_step_theta(&resp, hyper.a, hyper.b, p).max(floor);
        }
        if update_variance {
            let fitted = design.predict_standardized(&beta);
            let rss: f64 = design
                .y_c()
                .iter()
                .zip(fitted.iter())
                .map(|(y, f)| (y - f) * (y - f))
                .sum();
            let (s2, floored) = ca::update_sigma2(rss, n, sigma2_floor);
            sigma2 = s2;
            sigma2_floored = floored;
        }
        if max_change < settings.tol {
            converged = true;
            break;
        }
    }

    let lp = log_posterior(design, &beta, sigma2, lambda0, hyper, settings.theta_mode);
    if !lp.is_finite() {
        return Err(Error::Solver(format!(
            "non-finite log posterior at lambda0 = {lambda0}"
        )));
    }
    let ctx = PenaltyContext::new(theta, sigma2, n, lambda0, hyper.lambda1);
    Ok(SolverState {
        beta,
        theta,
        sigma2,
        delta: threshold_delta(&ctx).value,
        iterations,
        converged,
        sigma2_floored,
        log_posterior: lp,
    })
}

/// EM over the full ladder, with the same warm-start and variance-freezing
/// schedule as the coordinate-ascent driver. The reported support is the set
/// of exact zeros of the final weighted-LASSO solve.
pub fn em_fit(
    design: &StandardizedDesign,
    hyper: &SslHyperParams,
    settings: &FitSettings,
) -> Result<FitPath> {
    hyper.validate()?;
    let mut state = ca::initial_state(design, hyper, settings);
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
        state = em_at_rung(design, hyper, lambda0, &state, update_variance, settings)?;
        if frozen && state.converged && state.iterations < ca::FAST_CONVERGENCE_ITERS {
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

/// Final EM iterate with its responsibilities, for callers that want the
/// imputation diagnostics and not just the path.
pub fn em_state_at(
    design: &StandardizedDesign,
    hyper: &SslHyperParams,
    settings: &FitSettings,
) -> Result<EmState> {
    let path = em_fit(design, hyper, settings)?;
    let s = path.final_state();
    let ctx = PenaltyContext::new(
        s.theta,
        s.sigma2,
        design.n(),
        path.final_lambda0(),
        hyper.lambda1,
    );
    Ok(EmState {
        beta: s.beta.clone(),
        theta: s.theta,
        sigma2: s.sigma2,
        responsibilities: e_step(&s.beta, &ctx),
        iterations: s.iterations,
        converged: s.converged,
    })
}
