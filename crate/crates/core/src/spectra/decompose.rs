use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::correlation::CorrelationMatrix;
use super::returns::ReturnPanel;
use crate::error::{Error, Result};

/// Eigenvalues within this distance below zero are rounding and clamp to 0.
pub const NEGATIVE_CLAMP: f64 = 1e-10;
const MAX_SWEEPS_PER_DIM: usize = 500;

/// Ascending eigenvalues with orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub labels: Vec<String>,
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`; its components sum to >= 0.
    pub eigenvectors: DMatrix<f64>,
    /// Trace of the decomposed matrix.
    pub trace: f64,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("decomposition is never empty")
    }

    /// Largest eigenvalue as a share of the trace.
    pub fn explained_fraction(&self) -> f64 {
        self.lambda_max() / self.trace
    }

    pub fn vector(&self, index: usize) -> DVector<f64> {
        self.eigenvectors.column(index).into_owned()
    }

    pub fn v_max(&self) -> DVector<f64> {
        self.vector(self.n() - 1)
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n();
        let vtv = self.eigenvectors.transpose() * &self.eigenvectors;
        (vtv - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// `max |C − VΛVᵀ|`.
    pub fn reconstruction_error(&self, c: &CorrelationMatrix) -> f64 {
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        let rebuilt = &self.eigenvectors * lambda * self.eigenvectors.transpose();
        (c.entries() - rebuilt).amax()
    }
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
///
/// Eigenvalues in `[-1e-10, 0)` clamp to 0; anything more negative means the
/// input was not a valid correlation matrix and is reported.
pub fn decompose(c: &CorrelationMatrix) -> Result<SpectralDecomposition> {
    let n = c.n();
    let eig = SymmetricEigen::try_new(c.entries().clone(), f64::EPSILON, MAX_SWEEPS_PER_DIM * n)
        .ok_or(Error::NoConvergence(n))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut lambda = eig.eigenvalues[src];
        if !lambda.is_finite() {
            return Err(Error::NoConvergence(n));
        }
        if lambda < 0.0 {
            if lambda < -NEGATIVE_CLAMP {
                return Err(Error::NotPositiveSemidefinite(lambda));
            }
            lambda = 0.0;
        }
        eigenvalues.push(lambda);
        let mut v = eig.eigenvectors.column(src).into_owned();
        orient(&mut v);
        eigenvectors.set_column(k, &v);
    }

    Ok(SpectralDecomposition {
        labels: c.labels.clone(),
        eigenvalues,
        eigenvectors,
        trace: c.trace(),
    })
}

/// Flips `v` so its components sum to a nonnegative value. When the sum is
/// zero to rounding, the first non-negligible component is made positive.
fn orient(v: &mut DVector<f64>) {
    let sum = v.sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        v.iter().find(|x| x.abs() > 1e-12).is_some_and(|&x| x < 0.0)
    };
    if flip {
        v.neg_mut();
    }
}

/// Portfolio return series `z_i(t) = Σ_j v_ij g_j(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigensignal {
    /// Index into the ascending eigenvalue list.
    pub index: usize,
    pub values: Vec<f64>,
}

impl Eigensignal {
    /// Variance with the 1/T convention.
    pub fn variance(&self) -> f64 {
        let len = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / len;
        self.values.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / len
    }
}

fn check_dims(returns: &ReturnPanel, dec: &SpectralDecomposition) -> Result<()> {
    if returns.n_series() != dec.n() {
        return Err(Error::DimensionMismatch(format!(
            "panel has {} series, decomposition has dimension {}",
            returns.n_series(),
            dec.n()
        )));
    }
    Ok(())
}

/// Every eigensignal, in ascending eigenvalue order.
pub fn eigensignals(returns: &ReturnPanel, dec: &SpectralDecomposition) -> Result<Vec<Eigensignal>> {
    check_dims(returns, dec)?;
    let z = dec.eigenvectors.transpose() * &returns.g;
    Ok(z.row_iter()
        .enumerate()
        .map(|(index, row)| Eigensignal {
            index,
            values: row.iter().copied().collect(),
        })
        .collect())
}

/// One eigensignal by index.
pub fn eigensignal(returns: &ReturnPanel, dec: &SpectralDecomposition, index: usize) -> Result<Eigensignal> {
    check_dims(returns, dec)?;
    if index >= dec.n() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvector index {index} out of range for dimension {}",
            dec.n()
        )));
    }
    let z = returns.g.transpose() * dec.eigenvectors.column(index);
    Ok(Eigensignal {
        index,
        values: z.iter().copied().collect(),
    })
}
