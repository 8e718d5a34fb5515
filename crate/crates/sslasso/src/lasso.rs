//! Weighted-LASSO coordinate descent on a standardized design.
//!
//! Maximizes `-(1/2) ||y - X beta||^2 - sum_j w_j |beta_j|` by cyclic
//! soft-thresholding, assuming every column of `X` has squared norm `n`.
//! This single engine backs the EM M-step, the nodewise precision
//! regressions, and the cross-validated baseline.

use ndarray::{Array1, Array2};

use crate::data::StandardizedDesign;

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub beta: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn soft_threshold(z: f64, w: f64) -> f64 {
    let m = z.abs() - w;
    if m > 0.0 {
        m * z.signum()
    } else {
        0.0
    }
}

/// Cyclic coordinate descent over raw column slices. `columns[j]` must have
/// squared norm `n`; `weights[j]` is the absolute-value penalty on
/// coordinate `j`. Stops when the largest coefficient change in a sweep
/// drops below `tol`.
pub(crate) fn weighted_lasso_cols(
    columns: &[&[f64]],
    y: &[f64],
    weights: &[f64],
    init: Option<&Array1<f64>>,
    tol: f64,
    max_iter: usize,
) -> LassoFit {
    let n = y.len();
    let nf = n as f64;
    let p = columns.len();
    debug_assert_eq!(weights.len(), p);

    let mut beta = match init {
        Some(b) => b.clone(),
        None => Array1::zeros(p),
    };
    let mut residual: Vec<f64> = y.to_vec();
    for j in 0..p {
        if beta[j] != 0.0 {
            axpy(-beta[j], columns[j], &mut residual);
        }
    }

    let mut iterations = 0;
    let mut converged = false;
    for sweep in 0..max_iter {
        iterations = sweep + 1;
        let mut max_change = 0.0f64;
        for j in 0..p {
            let old = beta[j];
            let z = dot(columns[j], &residual) + nf * old;
            let new = soft_threshold(z, weights[j]) / nf;
            if new != old {
                axpy(old - new, columns[j], &mut residual);
                beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change < tol {
            converged = true;
            break;
        }
        // Refresh the residual occasionally so incremental drift cannot
        // accumulate over long runs.
        if sweep % 64 == 63 {
            residual.copy_from_slice(y);
            for j in 0..p {
                if beta[j] != 0.0 {
                    axpy(-beta[j], columns[j], &mut residual);
                }
            }
        }
    }

    LassoFit {
        beta,
        iterations,
        converged,
    }
}

/// Weighted LASSO on a [`StandardizedDesign`].
pub fn weighted_lasso(
    design: &StandardizedDesign,
    weights: &[f64],
    init: Option<&Array1<f64>>,
    tol: f64,
    max_iter: usize,
) -> LassoFit {
    let cols: Vec<&[f64]> = (0..design.p()).map(|j| design.column(j)).collect();
    let y = design.y_c();
    weighted_lasso_cols(
        &cols,
        y.as_slice().expect("contiguous response"),
        weights,
        init,
        tol,
        max_iter,
    )
}

/// Plain LASSO at a single rate: every coordinate gets penalty `lambda`.
pub fn lasso(design: &StandardizedDesign, lambda: f64, tol: f64, max_iter: usize) -> LassoFit {
    let w = vec![lambda; design.p()];
    weighted_lasso(design, &w, None, tol, max_iter)
}

/// Picks the rate from `grid` minimizing k-fold cross-validated prediction
/// error, then refits on the full design at that rate. Folds are assigned
/// round-robin over a permutation drawn from `perm` (pass `0..n` collected
/// and pre-shuffled for reproducibility).
#[allow(clippy::needless_range_loop)]
pub fn cv_lasso(
    design: &StandardizedDesign,
    grid: &[f64],
    folds: usize,
    perm: &[usize],
    tol: f64,
    max_iter: usize,
) -> (f64, LassoFit) {
    let n = design.n();
    let p = design.p();
    assert!(folds >= 2 && folds <= n);
    assert_eq!(perm.len(), n);

    let mut fold_of = vec![0usize; n];
    for (rank, &i) in perm.iter().enumerate() {
        fold_of[i] = rank % folds;
    }

    let y = design.y_c();
    let mut cv_err = vec![0.0f64; grid.len()];
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test_idx: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        let (cols, y_tr, scales) = subsample_standardized(design, &train_idx);
        let col_refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();

        let mut warm: Option<Array1<f64>> = None;
        // Walk the grid from its largest rate down so warm starts stay sparse.
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| grid[b].partial_cmp(&grid[a]).unwrap());
        let mut fold_err = vec![0.0f64; grid.len()];
        for &gi in &order {
            let fit = weighted_lasso_cols(
                &col_refs,
                &y_tr,
                &vec![grid[gi]; p],
                warm.as_ref(),
                tol,
                max_iter,
            );
            // Back out coefficients on the parent standardized scale before
            // predicting the held-out rows.
            let mut err = 0.0;
            for &i in &test_idx {
                let mut pred = 0.0;
                for j in 0..p {
                    if fit.beta[j] != 0.0 {
                        pred += fit.beta[j] / scales[j] * design.column(j)[i];
                    }
                }
                let d = y[i] - pred;
                err += d * d;
            }
            fold_err[gi] = err;
            warm = Some(fit.beta);
        }
        for (acc, e) in cv_err.iter_mut().zip(fold_err) {
            *acc += e;
        }
    }

    let mut best = 0;
    for gi in 1..grid.len() {
        if cv_err[gi] < cv_err[best] {
            best = gi;
        }
    }
    let lambda = grid[best];
    let fit = lasso(design, lambda, tol, max_iter);
    (lambda, fit)
}

/// Re-centers and re-scales the selected rows of an already standardized
/// design so the training subsample again satisfies the norm convention.
/// Returns the per-column scale relating subsample coefficients back to the
/// parent standardized scale.
fn subsample_standardized(
    design: &StandardizedDesign,
    rows: &[usize],
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let m = rows.len();
    let mf = m as f64;
    let p = design.p();
    let y_full = design.y_c();
    let y_mean: f64 = rows.iter().map(|&i| y_full[i]).sum::<f64>() / mf;
    let y_tr: Vec<f64> = rows.iter().map(|&i| y_full[i] - y_mean).collect();

    let mut cols = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let col = design.column(j);
        let mean: f64 = rows.iter().map(|&i| col[i]).sum::<f64>() / mf;
        let ss: f64 = rows.iter().map(|&i| (col[i] - mean).powi(2)).sum();
        let scale = (ss / mf).sqrt().max(1e-12);
        cols.push(rows.iter().map(|&i| (col[i] - mean) / scale).collect());
        scales.push(scale);
    }
    (cols, y_tr, scales)
}

/// Helmert-style design with mutually orthogonal, zero-mean columns each of
/// squared norm `n`; handy wherever a closed-form solution is wanted.
pub fn orthogonal_design(n: usize, p: usize, y: Array1<f64>) -> StandardizedDesign {
    assert!(p < n, "orthogonal centered design needs p < n");
    let nf = n as f64;
    let mut x = Array2::zeros((n, p));
    for j in 0..p {
        // Helmert vector j+1: +1 on the first j+1 entries, -(j+1) at entry
        // j+1, zero after; normalized then scaled to squared norm n.
        let k = j + 1;
        let mut col = vec![0.0; n];
        for item in col.iter_mut().take(k) {
            *item = 1.0;
        }
        col[k] = -(k as f64);
        let norm = (col.iter().map(|v| v * v).sum::<f64>()).sqrt();
        for (i, v) in col.iter().enumerate() {
            x[[i, j]] = v / norm * nf.sqrt();
        }
    }
    let y_mean = y.sum() / nf;
    let y_c = y.mapv(|v| v - y_mean);
    StandardizedDesign::from_standardized(y_c, x).expect("Helmert columns are standardized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::prelude::*;

    fn random_design(n: usize, p: usize, seed: u64) -> StandardizedDesign {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let y = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 4.0 - 2.0);
        let raw =
            crate::data::RawDataset::new(y, x, (0..p).map(|j| format!("x{}", j + 1)).collect())
                .unwrap();
        crate::data::standardize(&raw).unwrap()
    }

    #[test]
    fn huge_weights_zero_everything() {
        let design = random_design(30, 8, 1);
        let max_corr = (0..8)
            .map(|j| dot(design.column(j), design.y_c().as_slice().unwrap()).abs())
            .fold(0.0f64, f64::max);
        let fit = lasso(&design, max_corr * 1.01, 1e-10, 100);
        assert!(fit.converged);
        assert!(fit.beta.iter().all(|&b| b == 0.0));
        assert_eq!(fit.iterations, 1);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn orthogonal_design_gives_closed_form() {
        let n = 12;
        let p = 5;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let y = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 6.0 - 3.0);
        let design = orthogonal_design(n, p, y);
        let weights: Vec<f64> = (0..p).map(|j| 0.5 + j as f64).collect();
        let fit = weighted_lasso(&design, &weights, None, 1e-12, 200);
        for j in 0..p {
            let zj = dot(design.column(j), design.y_c().as_slice().unwrap());
            let expect = soft_threshold(zj, weights[j]) / n as f64;
            assert_abs_diff_eq!(fit.beta[j], expect, epsilon = 1e-10);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn kkt_conditions_hold() {
        let design = random_design(40, 12, 3);
        let weights: Vec<f64> = (0..12).map(|j| 2.0 + 0.3 * j as f64).collect();
        let fit = weighted_lasso(&design, &weights, None, 1e-12, 2000);
        assert!(fit.converged);
        let mut r = design.y_c().to_vec();
        for j in 0..12 {
            axpy(-fit.beta[j], design.column(j), &mut r);
        }
        for j in 0..12 {
            let corr = dot(design.column(j), &r);
            if fit.beta[j] == 0.0 {
                assert!(corr.abs() <= weights[j] + 1e-8, "col {j}: {corr}");
            } else {
                assert_abs_diff_eq!(corr, weights[j] * fit.beta[j].signum(), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn warm_start_is_a_fixed_point() {
        let design = random_design(25, 6, 4);
        let weights = vec![1.0; 6];
        let fit = weighted_lasso(&design, &weights, None, 1e-12, 1000);
        let again = weighted_lasso(&design, &weights, Some(&fit.beta), 1e-12, 1000);
        assert_eq!(again.iterations, 1);
        for j in 0..6 {
            assert_abs_diff_eq!(fit.beta[j], again.beta[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn cv_lasso_is_deterministic_and_plausible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let p = 10;
        let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
        let mut y = Array1::zeros(n);
        for i in 0..n {
            y[i] = 3.0 * x[[i, 0]] - 2.0 * x[[i, 3]] + 0.3 * (rng.random::<f64>() - 0.5);
        }
        let raw =
            crate::data::RawDataset::new(y, x, (0..p).map(|j| format!("x{}", j + 1)).collect())
                .unwrap();
        let design = crate::data::standardize(&raw).unwrap();
        let grid = [0.5, 2.0, 8.0, 32.0, 128.0];
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let (lam_a, fit_a) = cv_lasso(&design, &grid, 5, &perm, 1e-9, 500);
        let (lam_b, fit_b) = cv_lasso(&design, &grid, 5, &perm, 1e-9, 500);
        assert_eq!(lam_a, lam_b);
        assert_eq!(fit_a.beta, fit_b.beta);
        // Strong signal, tiny noise: CV must not pick the harshest rate.
        assert!(lam_a < 128.0);
        assert!(fit_a.beta[0] > 0.0 && fit_a.beta[3] < 0.0);
    }

    #[test]
    fn helmert_columns_are_orthogonal() {
        let design = orthogonal_design(9, 4, array![1.0, 2.0, 0.5, -1.0, 3.0, 0.0, 2.0, 1.0, -2.0]);
        for j in 0..4 {
            for k in 0..j {
                assert_abs_diff_eq!(dot(design.column(j), design.column(k)), 0.0, epsilon = 1e-9);
            }
            assert_abs_diff_eq!(dot(design.column(j), design.column(j)), 9.0, epsilon = 1e-9);
        }
    }
}
