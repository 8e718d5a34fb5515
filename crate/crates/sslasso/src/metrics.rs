//! Selection and estimation metrics for one replication.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};

/// Confusion counts between a selected support and the true support over `p`
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Counts agreement between `selected` and `truth` (0-based index sets).
pub fn confusion(selected: &[usize], truth: &[usize], p: usize) -> ConfusionCounts {
    let mut sel = vec![false; p];
    for &j in selected {
        sel[j] = true;
    }
    let mut tru = vec![false; p];
    for &j in truth {
        tru[j] = true;
    }
    let mut c = ConfusionCounts {
        tp: 0,
        tn: 0,
        fp: 0,
        fn_: 0,
    };
    for j in 0..p {
        match (sel[j], tru[j]) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// Per-replication metric bundle.
///
/// `fdr` here is defined as `FP / (TN + FP)`. That quantity is conventionally
/// called the false positive rate; the name is kept for consistency with the
/// benchmark's reporting format. `mcc_degenerate` flags a zero MCC that was
/// assigned by convention because the denominator vanished outside the
/// all-correct / all-incorrect endpoint cases.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub mpe: f64,
    pub model_size: usize,
    pub fdr: f64,
    pub fnr: f64,
    pub mcc: f64,
    pub mcc_degenerate: bool,
}

/// `mse = ||beta_hat - beta0||^2 / p`, `mpe = ||X (beta_hat - beta0)||^2 / n`,
/// plus the selection ratios derived from `counts`.
pub fn metrics(
    counts: &ConfusionCounts,
    beta_hat: &Array1<f64>,
    beta0: &Array1<f64>,
    x: &Array2<f64>,
) -> Result<MetricsReport> {
    let p = beta_hat.len();
    if beta0.len() != p || x.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat {}, beta0 {}, X has {} columns",
            p,
            beta0.len(),
            x.ncols()
        )));
    }
    if counts.total() != p {
        return Err(Error::DimensionMismatch(format!(
            "confusion counts sum to {} over p = {p}",
            counts.total()
        )));
    }
    let n = x.nrows() as f64;
    let diff = beta_hat - beta0;
    let mse = diff.iter().map(|v| v * v).sum::<f64>() / p as f64;
    let xd = x.dot(&diff);
    let mpe = xd.iter().map(|v| v * v).sum::<f64>() / n;

    let fdr = ratio(counts.fp, counts.tn + counts.fp);
    let fnr = ratio(counts.fn_, counts.tp + counts.fn_);
    let (mcc, mcc_degenerate) = mcc_of(counts);

    Ok(MetricsReport {
        mse,
        mpe,
        model_size: counts.tp + counts.fp,
        fdr,
        fnr,
        mcc,
        mcc_degenerate,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Matthews correlation with the endpoint conventions: 1 when there are no
/// errors, -1 when there are no correct calls, and 0 (flagged) when the
/// denominator vanishes otherwise.
pub fn mcc_of(c: &ConfusionCounts) -> (f64, bool) {
    if c.fp == 0 && c.fn_ == 0 {
        return (1.0, false);
    }
    if c.tp == 0 && c.tn == 0 {
        return (-1.0, false);
    }
    let tp = c.tp as f64;
    let tn = c.tn as f64;
    let fp = c.fp as f64;
    let fn_ = c.fn_ as f64;
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if den == 0.0 {
        (0.0, true)
    } else {
        ((tp * tn - fp * fn_) / den, false)
    }
}
