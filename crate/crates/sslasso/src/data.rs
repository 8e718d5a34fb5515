//! Dataset ingestion and standardization.
//!
//! Solvers in this crate operate on a centered response and a design matrix
//! whose columns are centered and rescaled so every column has squared norm
//! `n`. [`standardize`] produces that representation together with the
//! per-column affine transforms, and [`destandardize`] maps fitted
//! coefficients back to the raw scale (reconstructing the intercept, which is
//! never fitted directly).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use std::path::Path;

use crate::error::{Error, Result};

/// A dataset as read from disk: response `y` plus an `n x p` design matrix in
/// raw units.
#[derive(Debug, Clone)]
pub struct RawDataset {
    pub y: Array1<f64>,
    pub x: Array2<f64>,
    pub column_names: Vec<String>,
}

impl RawDataset {
    /// Builds a dataset from parts, validating dimensions and finiteness.
    pub fn new(y: Array1<f64>, x: Array2<f64>, column_names: Vec<String>) -> Result<Self> {
        let n = y.len();
        let p = x.ncols();
        if x.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "y has {n} rows but X has {}",
                x.nrows()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        if p == 0 {
            return Err(Error::InvalidData("no predictors".into()));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {p} predictors",
                column_names.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite response value at row {}",
                i + 1
            )));
        }
        for (j, col) in x.columns().into_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite value at row {}, predictor {} ({})",
                    i + 1,
                    j + 1,
                    column_names[j]
                )));
            }
        }
        Ok(RawDataset { y, x, column_names })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Centered response and column-standardized design, with the scalings needed
/// to undo the transform.
///
/// Invariants: the centered response sums to zero, each design column has
/// zero mean and squared norm `n`, and all scales are strictly positive.
/// The design is stored column-major so per-coordinate solver sweeps read
/// contiguous memory.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    y_c: Array1<f64>,
    x_s: Array2<f64>,
    y_mean: f64,
    col_means: Array1<f64>,
    col_scales: Array1<f64>,
    column_names: Vec<String>,
}

impl StandardizedDesign {
    pub fn n(&self) -> usize {
        self.y_c.len()
    }

    pub fn p(&self) -> usize {
        self.x_s.ncols()
    }

    pub fn y_c(&self) -> ArrayView1<'_, f64> {
        self.y_c.view()
    }

    pub fn x_s(&self) -> ArrayView2<'_, f64> {
        self.x_s.view()
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn col_means(&self) -> ArrayView1<'_, f64> {
        self.col_means.view()
    }

    pub fn col_scales(&self) -> ArrayView1<'_, f64> {
        self.col_scales.view()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Contiguous slice view of standardized column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        let flat = self
            .x_s
            .as_slice_memory_order()
            .expect("design stored column-major");
        &flat[j * n..(j + 1) * n]
    }

    /// Squared norm of the centered response.
    pub fn y_c_norm2(&self) -> f64 {
        self.y_c.iter().map(|v| v * v).sum()
    }

    /// Wraps already-standardized data (used by tests and nodewise
    /// regressions). Verifies the column norm and centering invariants.
    pub fn from_standardized(y_c: Array1<f64>, x_s: Array2<f64>) -> Result<Self> {
        let n = y_c.len();
        let p = x_s.ncols();
        if x_s.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "y has {n} rows but X has {}",
                x_s.nrows()
            )));
        }
        let nf = n as f64;
        let y_sum: f64 = y_c.iter().sum();
        if y_sum.abs() > 1e-8 * nf {
            return Err(Error::InvalidData(format!(
                "response not centered: sum = {y_sum:.3e}"
            )));
        }
        for (j, col) in x_s.columns().into_iter().enumerate() {
            let s: f64 = col.iter().sum();
            let ss: f64 = col.iter().map(|v| v * v).sum();
            if s.abs() > 1e-8 * nf || (ss - nf).abs() > 1e-6 * nf {
                return Err(Error::InvalidData(format!(
                    "column {} not standardized: sum = {s:.3e}, squared norm = {ss:.6}",
                    j + 1
                )));
            }
        }
        let names = (1..=p).map(|j| format!("x{j}")).collect();
        let x_s = to_column_major(&x_s);
        Ok(StandardizedDesign {
            y_c,
            x_s,
            y_mean: 0.0,
            col_means: Array1::zeros(p),
            col_scales: Array1::ones(p),
            column_names: names,
        })
    }

    /// Fitted values `X_s beta` on the standardized scale.
    pub fn predict_standardized(&self, beta_std: &Array1<f64>) -> Array1<f64> {
        self.x_s.dot(beta_std)
    }
}

fn to_column_major(x: &Array2<f64>) -> Array2<f64> {
    let (n, p) = x.dim();
    let mut out = Array2::zeros((n, p).f());
    out.assign(x);
    out
}

/// Reads a CSV dataset. The header row is required; the first column must be
/// named `y` and holds the response, each remaining column is a predictor.
/// Values use a dot decimal separator regardless of locale.
pub fn load_dataset(path: &Path) -> Result<RawDataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| csv_error_to_parse(e, 1))?
        .clone();
    if headers.is_empty() || headers.get(0) != Some("y") {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "first column must be named \"y\"".into(),
        });
    }
    if headers.len() < 2 {
        return Err(Error::InvalidData("no predictors".into()));
    }
    let column_names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let p = column_names.len();

    let mut y = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error_to_parse(e, i as u64 + 2))?;
        let line = record
            .position()
            .map(|pos| pos.line())
            .unwrap_or(i as u64 + 2);
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: j + 1,
                message: format!("expected a number, found {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: j + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            if j == 0 {
                y.push(value);
            } else {
                rows.push(value);
            }
        }
    }

    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
    }
    let x = Array2::from_shape_vec((n, p), rows)
        .map_err(|e| Error::InvalidData(format!("shape error: {e}")))?;
    RawDataset::new(Array1::from_vec(y), x, column_names)
}

fn csv_error_to_parse(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::Parse {
        line,
        column: 1,
        message: e.to_string(),
    }
}

/// Centers the response, then centers each design column and divides it by
/// `sqrt(sum((x - mean)^2) / n)` so the standardized column has squared norm
/// exactly `n`. Constant columns are a hard error.
pub fn standardize(raw: &RawDataset) -> Result<StandardizedDesign> {
    let n = raw.n();
    let p = raw.p();
    let nf = n as f64;

    let y_mean = raw.y.sum() / nf;
    let y_c = raw.y.mapv(|v| v - y_mean);

    let mut x_s = Array2::zeros((n, p).f());
    let mut col_means = Array1::zeros(p);
    let mut col_scales = Array1::zeros(p);
    for j in 0..p {
        let col = raw.x.column(j);
        let mean = col.sum() / nf;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let scale = (ss / nf).sqrt();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::ConstantColumn {
                index: j + 1,
                name: raw.column_names[j].clone(),
            });
        }
        col_means[j] = mean;
        col_scales[j] = scale;
        let mut out = x_s.column_mut(j);
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o = (v - mean) / scale;
        }
    }

    Ok(StandardizedDesign {
        y_c,
        x_s,
        y_mean,
        col_means,
        col_scales,
        column_names: raw.column_names.clone(),
    })
}

/// Maps standardized-scale coefficients back to raw units and reconstructs
/// the intercept: `beta_raw[j] = beta_std[j] / scale[j]`,
/// `intercept = y_mean - sum_j beta_raw[j] * mean[j]`.
pub fn destandardize(
    beta_std: &Array1<f64>,
    design: &StandardizedDesign,
) -> Result<(Array1<f64>, f64)> {
    let p = design.p();
    if beta_std.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "beta has length {} but design has {p} columns",
            beta_std.len()
        )));
    }
    let beta_raw: Array1<f64> = beta_std
        .iter()
        .zip(design.col_scales.iter())
        .map(|(b, s)| b / s)
        .collect();
    let offset: f64 = beta_raw
        .iter()
        .zip(design.col_means.iter())
        .map(|(b, m)| b * m)
        .sum();
    Ok((beta_raw, design.y_mean - offset))
}
