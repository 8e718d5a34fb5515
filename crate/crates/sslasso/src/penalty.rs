//! Penalty calculus for the spike-and-slab LASSO.
//!
//! The prior on each coefficient is a two-component Laplace mixture: a spike
//! with large rate `lambda0` absorbing negligible coefficients and a diffuse
//! slab with small rate `lambda1` holding the large ones. Everything the
//! solvers need derives from four pure functions of a scalar coefficient:
//!
//! * [`pstar`] — conditional probability the coefficient came from the slab,
//! * [`lambda_star`] — the resulting adaptive shrinkage rate, a `pstar`-
//!   weighted average of `lambda1` and `lambda0`,
//! * [`pen_singleton`] — the per-coordinate log-prior penalty, centered so
//!   `pen(0) = 0`, whose derivative in `|beta|` is `-lambda_star(beta)`,
//! * [`threshold_delta`] — the selection threshold below which a partial
//!   correlation is forced to exactly zero in the global mode.
//!
//! All mixture ratios run through log-space arithmetic: the raw ratio
//! `exp(-|beta| (lambda0 - lambda1))` underflows long before the ladder tail
//! (`lambda0` up to 1e6) is reached.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the noise variance is held fixed or learned alongside the
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum VarianceMode {
    Fixed(f64),
    Unknown,
}

/// Hyperparameters shared by both solvers: the slab rate, the increasing
/// ladder of spike rates, the Beta(a, b) prior on the mixing weight, and the
/// variance handling mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SslHyperParams {
    pub lambda1: f64,
    pub lambda0_ladder: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub variance: VarianceMode,
}

impl SslHyperParams {
    /// Default ladder: 50 rungs, linearly spaced from `lambda1 + 1` up to
    /// `max(p, 100)`, with `a = 1`, `b = p`, variance unknown.
    pub fn defaults_for(p: usize, lambda1: f64) -> Self {
        let hi = (p.max(100)) as f64;
        SslHyperParams {
            lambda1,
            lambda0_ladder: linear_ladder(lambda1 + 1.0, hi, 50),
            a: 1.0,
            b: p as f64,
            variance: VarianceMode::Unknown,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.lambda1) {
            return Err(Error::InvalidConfig(format!(
                "lambda1 must be positive, got {}",
                self.lambda1
            )));
        }
        if self.lambda0_ladder.is_empty() {
            return Err(Error::InvalidConfig("empty lambda0 ladder".into()));
        }
        for (i, &l0) in self.lambda0_ladder.iter().enumerate() {
            if !l0.is_finite() || l0 < self.lambda1 {
                return Err(Error::InvalidConfig(format!(
                    "ladder rung {} ({l0}) must be >= lambda1 ({})",
                    i + 1,
                    self.lambda1
                )));
            }
            if i > 0 && l0 <= self.lambda0_ladder[i - 1] {
                return Err(Error::InvalidConfig(format!(
                    "ladder must be strictly increasing at rung {}",
                    i + 1
                )));
            }
        }
        if !positive(self.a) || !positive(self.b) {
            return Err(Error::InvalidConfig(format!(
                "beta prior shape (a, b) = ({}, {}) must be positive",
                self.a, self.b
            )));
        }
        if let VarianceMode::Fixed(s2) = self.variance {
            if !positive(s2) {
                return Err(Error::InvalidConfig(format!(
                    "fixed variance must be positive, got {s2}"
                )));
            }
        }
        Ok(())
    }
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let step = (hi - lo) / (count as f64 - 1.0);
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// Everything the penalty functions depend on at a given ladder rung:
/// the mixing weight (collapsed to a single scalar shared across
/// coordinates), the noise variance, the sample size, and the two rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyContext {
    pub theta: f64,
    pub sigma2: f64,
    pub n: usize,
    pub lambda0: f64,
    pub lambda1: f64,
}

impl PenaltyContext {
    pub fn new(theta: f64, sigma2: f64, n: usize, lambda0: f64, lambda1: f64) -> Self {
        debug_assert!(theta > 0.0 && theta < 1.0, "theta must be in (0,1)");
        debug_assert!(sigma2 > 0.0, "sigma2 must be positive");
        debug_assert!(lambda0 >= lambda1 && lambda1 > 0.0);
        PenaltyContext {
            theta,
            sigma2,
            n,
            lambda0,
            lambda1,
        }
    }

    /// Log-odds that the coefficient came from the spike rather than the
    /// slab: `ln((1-theta)/theta) + ln(lambda0/lambda1) - |beta| (lambda0 - lambda1)`.
    #[inline]
    fn spike_log_odds(&self, beta: f64) -> f64 {
        (1.0 - self.theta).ln() - self.theta.ln() + (self.lambda0 / self.lambda1).ln()
            - beta.abs() * (self.lambda0 - self.lambda1)
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Conditional slab-inclusion probability of a coefficient value. Even in
/// `beta`, nondecreasing in `|beta|`, and equal to `theta` when the two rates
/// coincide. Clamped to the open unit interval: the true value never reaches
/// the endpoints but the sigmoid saturates in f64 around |t| > 37.
pub fn pstar(beta: f64, ctx: &PenaltyContext) -> f64 {
    sigmoid(-ctx.spike_log_odds(beta)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `ln pstar(beta)` evaluated directly in log space; stays accurate when the
/// probability itself underflows.
pub fn log_pstar(beta: f64, ctx: &PenaltyContext) -> f64 {
    -softplus(ctx.spike_log_odds(beta))
}

/// Adaptive shrinkage rate: `lambda1 * pstar + lambda0 * (1 - pstar)`.
/// Always in `[lambda1, lambda0]`, nonincreasing in `|beta|`.
pub fn lambda_star(beta: f64, ctx: &PenaltyContext) -> f64 {
    let t = ctx.spike_log_odds(beta);
    // Both mixture weights from their own stable branch so the small one
    // keeps full relative accuracy.
    let p_slab = sigmoid(-t);
    let p_spike = sigmoid(t);
    ctx.lambda1 * p_slab + ctx.lambda0 * p_spike
}

/// Centered per-coordinate penalty:
/// `-lambda1 |beta| + ln[pstar(0) / pstar(beta)]`. Zero at the origin,
/// nonpositive everywhere, with derivative `-lambda_star(beta)` in `|beta|`.
pub fn pen_singleton(beta: f64, ctx: &PenaltyContext) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    -ctx.lambda1 * beta.abs() + log_pstar(0.0, ctx) - log_pstar(beta, ctx)
}

/// Curvature diagnostic deciding which threshold branch applies:
/// `g(x) = [lambda_star(x) - lambda1]^2 + (2n / sigma2) ln pstar(x)`.
pub fn g_fn(x: f64, ctx: &PenaltyContext) -> f64 {
    let t = ctx.spike_log_odds(x);
    // lambda_star - lambda1 = (lambda0 - lambda1) * P(spike), computed
    // directly to avoid cancellation when pstar is close to one.
    let gap = (ctx.lambda0 - ctx.lambda1) * sigmoid(t);
    gap * gap + (2.0 * ctx.n as f64 / ctx.sigma2) * log_pstar(x, ctx)
}

/// Which closed-form branch produced the selection threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaBranch {
    /// `g(0) > 0`: `sqrt(2 n sigma2 ln[1/pstar(0)]) + sigma2 lambda1`.
    SqrtRule,
    /// `g(0) <= 0`: `sigma2 * lambda_star(0)`, the plain soft-threshold scale.
    LambdaStarRule,
}

/// Selection threshold with its branch diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionThreshold {
    pub value: f64,
    pub branch: DeltaBranch,
}

/// Closed-form approximation of the generalized-thresholding constant. A
/// coordinate whose partial-residual correlation `|z_j|` falls at or below
/// this value is set to exactly zero.
pub fn threshold_delta(ctx: &PenaltyContext) -> SelectionThreshold {
    if g_fn(0.0, ctx) > 0.0 {
        let value = (2.0 * ctx.n as f64 * ctx.sigma2 * (-log_pstar(0.0, ctx))).sqrt()
            + ctx.sigma2 * ctx.lambda1;
        SelectionThreshold {
            value,
            branch: DeltaBranch::SqrtRule,
        }
    } else {
        SelectionThreshold {
            value: ctx.sigma2 * lambda_star(0.0, ctx),
            branch: DeltaBranch::LambdaStarRule,
        }
    }
}

/// Slow-path cross-check for [`threshold_delta`]: evaluates the defining
/// infimum `inf_{t>0} [n t / 2 - sigma2 pen(t) / t]` by a coarse log-spaced
/// scan followed by golden-section refinement of the best bracket.
pub fn threshold_delta_exact(ctx: &PenaltyContext) -> f64 {
    let h = |t: f64| 0.5 * ctx.n as f64 * t - ctx.sigma2 * pen_singleton(t, ctx) / t;

    // The objective tends to sigma2 * lambda_star(0) as t -> 0+ and grows
    // linearly for large t; scan wide enough to catch any interior dip.
    let approx = threshold_delta(ctx).value;
    let t_hi = (8.0 * approx / ctx.n as f64).max(1.0);
    let t_lo = 1e-9;
    let grid = 400;
    let ratio = (t_hi / t_lo).ln() / (grid as f64 - 1.0);
    let mut best_k: usize = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..grid {
        let t = t_lo * (ratio * k as f64).exp();
        let v = h(t);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let mut a = t_lo * (ratio * best_k.saturating_sub(1) as f64).exp();
    let mut b = t_lo * (ratio * (best_k + 1).min(grid - 1) as f64).exp();
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = h(c);
    let mut fd = h(d);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d);
        }
        if (b - a).abs() < 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    best_v.min(fc).min(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ctx(theta: f64, sigma2: f64, n: usize, l0: f64, l1: f64) -> PenaltyContext {
        PenaltyContext::new(theta, sigma2, n, l0, l1)
    }

    /// Direct-arithmetic oracle without log-space tricks; valid only where
    /// the plain exponential does not overflow.
    fn pstar_naive(beta: f64, c: &PenaltyContext) -> f64 {
        1.0 / (1.0
            + (1.0 - c.theta) / c.theta
                * (c.lambda0 / c.lambda1)
                * (-beta.abs() * (c.lambda0 - c.lambda1)).exp())
    }

    #[test]
    fn pstar_collapses_to_theta_when_rates_match() {
        let c = ctx(0.3, 1.0, 50, 2.0, 2.0);
        for beta in [-10.0, -0.1, 0.0, 0.7, 42.0] {
            assert_abs_diff_eq!(pstar(beta, &c), 0.3, epsilon = 1e-15);
        }
    }

    #[test]
    fn pstar_reference_values() {
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        assert_abs_diff_eq!(pstar(0.0, &c), 1.0 / 21.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pstar(10.0, &c), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn lambda_star_reference_values() {
        let c2 = ctx(0.4, 1.0, 10, 2.0, 2.0);
        for beta in [-3.0, 0.0, 1.0] {
            assert_abs_diff_eq!(lambda_star(beta, &c2), 2.0, epsilon = 1e-14);
        }
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        assert_abs_diff_eq!(lambda_star(0.0, &c), 401.0 / 21.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda_star(10.0, &c), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn pen_is_centered_and_reduces_to_l1() {
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        assert_eq!(pen_singleton(0.0, &c), 0.0);

        let cl = ctx(0.37, 1.0, 100, 3.0, 3.0);
        for beta in [-2.5, -0.01, 0.4, 7.0] {
            assert_abs_diff_eq!(pen_singleton(beta, &cl), -3.0 * beta.abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn pen_derivative_matches_lambda_star() {
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        let beta = 0.5;
        let h = 1e-6;
        let fd = (pen_singleton(beta + h, &c) - pen_singleton(beta - h, &c)) / (2.0 * h);
        assert_abs_diff_eq!(fd, -lambda_star(beta, &c), epsilon = 1e-6);
    }

    #[test]
    fn pen_derivative_matches_lambda_star_at_random_points() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let theta = 0.02 + 0.96 * rng.random::<f64>();
            let l1 = 0.05 + 2.0 * rng.random::<f64>();
            let l0 = l1 + 30.0 * rng.random::<f64>();
            let c = ctx(theta, 0.5 + rng.random::<f64>(), 80, l0, l1);
            let beta = 0.01 + 3.0 * rng.random::<f64>();
            let h = 1e-6;
            let fd = (pen_singleton(beta + h, &c) - pen_singleton(beta - h, &c)) / (2.0 * h);
            assert!(
                (fd + lambda_star(beta, &c)).abs() < 1e-5,
                "fd {fd} vs -lambda_star {}",
                -lambda_star(beta, &c)
            );
        }
    }

    #[test]
    fn g_reference_values() {
        let cl = ctx(0.25, 2.0, 60, 1.5, 1.5);
        assert_abs_diff_eq!(
            g_fn(0.0, &cl),
            (2.0 * 60.0 / 2.0) * 0.25f64.ln(),
            epsilon = 1e-10
        );
        assert!(g_fn(0.0, &cl) < 0.0);

        // Frozen from the direct formula: (401/21 - 1)^2 + 200 ln(1/21).
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        assert_abs_diff_eq!(g_fn(0.0, &c), -281.46684582132855, epsilon = 1e-9);
    }

    #[test]
    fn g_is_continuous_on_a_grid() {
        let c = ctx(0.2, 1.3, 40, 15.0, 0.5);
        let mut prev = g_fn(0.0, &c);
        for k in 1..=2000 {
            let x = k as f64 * 1e-3;
            let cur = g_fn(x, &c);
            assert!((cur - prev).abs() < 1.0, "jump at x={x}");
            prev = cur;
        }
    }

    #[test]
    fn delta_reduces_to_lasso_threshold() {
        let c = ctx(0.3, 1.7, 50, 2.5, 2.5);
        let d = threshold_delta(&c);
        assert_eq!(d.branch, DeltaBranch::LambdaStarRule);
        assert_abs_diff_eq!(d.value, 1.7 * 2.5, epsilon = 1e-12);
    }

    #[test]
    fn delta_reference_value() {
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        let d = threshold_delta(&c);
        assert_eq!(d.branch, DeltaBranch::LambdaStarRule);
        assert_abs_diff_eq!(d.value, 401.0 / 21.0, epsilon = 1e-12);
    }

    #[test]
    fn delta_sqrt_branch_fires_for_sparse_theta() {
        // Small theta with a wide rate gap pushes g(0) positive.
        let c = ctx(0.001, 1.0, 100, 200.0, 0.01);
        assert!(g_fn(0.0, &c) > 0.0);
        let d = threshold_delta(&c);
        assert_eq!(d.branch, DeltaBranch::SqrtRule);
        let expect = (2.0 * 100.0 * (-log_pstar(0.0, &c))).sqrt() + 0.01;
        assert_abs_diff_eq!(d.value, expect, epsilon = 1e-10);
    }

    #[test]
    fn delta_nonincreasing_in_theta() {
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let theta = 0.01 * k as f64;
            let c = ctx(theta, 1.0, 100, 20.0, 1.0);
            let d = threshold_delta(&c).value;
            assert!(d <= prev + 1e-12, "delta increased at theta={theta}");
            prev = d;
        }
    }

    #[test]
    fn exact_infimum_matches_closed_form_in_lasso_limit() {
        // With equal rates pen(t) = -lambda1 t exactly, so the infimum sits
        // at t -> 0 with value sigma2 * lambda1.
        let c = ctx(0.3, 1.4, 80, 2.0, 2.0);
        let exact = threshold_delta_exact(&c);
        assert_abs_diff_eq!(exact, 1.4 * 2.0, epsilon = 1e-6);
    }

    #[test]
    fn exact_infimum_close_to_approximation_on_reference_context() {
        let c = ctx(0.5, 1.0, 100, 20.0, 1.0);
        let exact = threshold_delta_exact(&c);
        let approx = threshold_delta(&c).value;
        assert!(exact <= approx + 1e-8);
        assert!(
            (exact - approx).abs() / approx < 0.05,
            "exact {exact} vs approx {approx}"
        );
    }

    #[test]
    fn all_functions_finite_at_extreme_rates() {
        let c = ctx(0.01, 1.0, 1000, 1e6, 0.5);
        for &beta in &[-1e3, -1.0, 0.0, 1e-8, 1.0, 1e3] {
            assert!(pstar(beta, &c).is_finite());
            assert!(lambda_star(beta, &c).is_finite());
            assert!(pen_singleton(beta, &c).is_finite());
            assert!(g_fn(beta, &c).is_finite());
        }
        assert!(threshold_delta(&c).value.is_finite());
    }

    #[test]
    fn hyper_validation_rejects_bad_ladders() {
        let mut h = SslHyperParams::defaults_for(10, 1.0);
        assert!(h.validate().is_ok());
        h.lambda0_ladder = vec![2.0, 2.0];
        assert!(h.validate().is_err());
        h.lambda0_ladder = vec![0.5];
        assert!(h.validate().is_err());
        h.lambda0_ladder = vec![];
        assert!(h.validate().is_err());
        let mut h2 = SslHyperParams::defaults_for(10, -1.0);
        assert!(h2.validate().is_err());
        h2.lambda1 = 1.0;
        h2.lambda0_ladder = vec![2.0];
        h2.a = 0.0;
        assert!(h2.validate().is_err());
    }

    #[test]
    fn default_ladder_shape() {
        let h = SslHyperParams::defaults_for(1000, 1.0);
        assert_eq!(h.lambda0_ladder.len(), 50);
        assert_abs_diff_eq!(h.lambda0_ladder[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.lambda0_ladder[49], 1000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.b, 1000.0, epsilon = 0.0);
        let small = SslHyperParams::defaults_for(12, 0.01);
        assert_abs_diff_eq!(small.lambda0_ladder[49], 100.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn pstar_bounds_symmetry_monotonicity(
            theta in 0.01f64..0.99,
            l1 in 0.05f64..3.0,
            gap in 0.0f64..40.0,
            b1 in -8.0f64..8.0,
            b2 in -8.0f64..8.0,
        ) {
            let c = ctx(theta, 1.0, 100, l1 + gap, l1);
            let p1 = pstar(b1, &c);
            prop_assert!(p1 > 0.0 && p1 < 1.0);
            prop_assert!((pstar(-b1, &c) - p1).abs() < 1e-15);
            let (lo, hi) = if b1.abs() <= b2.abs() { (b1, b2) } else { (b2, b1) };
            prop_assert!(pstar(lo, &c) <= pstar(hi, &c) + 1e-15);
        }

        #[test]
        fn lambda_star_bounds_and_monotonicity(
            theta in 0.01f64..0.99,
            l1 in 0.05f64..3.0,
            gap in 0.0f64..40.0,
            b1 in -8.0f64..8.0,
            b2 in -8.0f64..8.0,
        ) {
            let c = ctx(theta, 1.0, 100, l1 + gap, l1);
            let v = lambda_star(b1, &c);
            prop_assert!(v >= c.lambda1 - 1e-12 && v <= c.lambda0 + 1e-12);
            let (lo, hi) = if b1.abs() <= b2.abs() { (b1, b2) } else { (b2, b1) };
            prop_assert!(lambda_star(lo, &c) >= lambda_star(hi, &c) - 1e-12);
        }

        #[test]
        fn pen_nonpositive(
            theta in 0.01f64..0.99,
            l1 in 0.05f64..3.0,
            gap in 0.0f64..40.0,
            beta in -8.0f64..8.0,
        ) {
            let c = ctx(theta, 1.0, 100, l1 + gap, l1);
            prop_assert!(pen_singleton(beta, &c) <= 1e-12);
        }
    }

    #[test]
    fn log_space_matches_naive_in_safe_range() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let theta = 0.02 + 0.96 * rng.random::<f64>();
            let l1 = 0.05 + 3.0 * rng.random::<f64>();
            let l0 = l1 + 40.0 * rng.random::<f64>();
            let c = ctx(theta, 1.0, 100, l0, l1);
            let beta = 6.0 * rng.random::<f64>() - 3.0;
            let a = pstar(beta, &c);
            let b = pstar_naive(beta, &c);
            assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }
    }
}
