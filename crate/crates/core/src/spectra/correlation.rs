use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::returns::ReturnPanel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Raw,
    /// Built from market-factor residuals.
    Residual,
}

/// Symmetric correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub kind: MatrixKind,
    pub labels: Vec<String>,
    entries: DMatrix<f64>,
}

const SYMMETRY_TOL: f64 = 1e-14;
const DIAGONAL_TOL: f64 = 1e-12;

impl CorrelationMatrix {
    /// Wraps an explicit matrix after checking symmetry, unit diagonal and range.
    pub fn from_entries(kind: MatrixKind, labels: Vec<String>, entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with {} labels",
                entries.nrows(),
                entries.ncols(),
                labels.len()
            )));
        }
        if n < 2 {
            return Err(Error::TooFewSeries(n));
        }
        for i in 0..n {
            if (entries[(i, i)] - 1.0).abs() > DIAGONAL_TOL {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal entry {i} is {}, expected 1",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOL || a.abs() > 1.0 + DIAGONAL_TOL {
                    return Err(Error::DimensionMismatch(format!(
                        "entry ({i},{j}) = {a} is not a valid symmetric correlation"
                    )));
                }
            }
        }
        Ok(Self { kind, labels, entries })
    }

    /// Exact uniform-correlation matrix: 1 on the diagonal, `c` elsewhere.
    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        let entries = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { c });
        Self::from_entries(MatrixKind::Raw, (0..n).map(|i| format!("S{i:03}")).collect(), entries)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Off-diagonal upper-triangle entries, row by row.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.entries[(i, j)]);
            }
        }
        out
    }
}

/// `C = g gᵀ / T` from a normalized panel.
pub fn correlation_matrix(returns: &ReturnPanel) -> Result<CorrelationMatrix> {
    correlation_from_normalized(&returns.g, returns.series.clone(), MatrixKind::Raw)
}

pub(crate) fn correlation_from_normalized(
    g: &DMatrix<f64>,
    labels: Vec<String>,
    kind: MatrixKind,
) -> Result<CorrelationMatrix> {
    let n = g.nrows();
    if n < 2 {
        return Err(Error::TooFewSeries(n));
    }
    let len = g.ncols();
    if len < 2 {
        return Err(Error::SeriesTooShort(len));
    }
    let mut c = g * g.transpose();
    c.scale_mut(1.0 / len as f64);
    for i in 0..n {
        for j in 0..i {
            c[(i, j)] = c[(j, i)];
        }
    }
    CorrelationMatrix::from_entries(kind, labels, c)
}
