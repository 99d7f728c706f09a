//! Market-mode removal: regress every normalized series on the leading
//! eigensignal, then build the residual correlation matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{
    correlation_from_normalized, normalize_rows, BinSpec, CorrelationMatrix, Eigensignal, Histogram, MatrixKind,
    ReturnPanel, SpectralDecomposition,
};

/// Per-series OLS fit `g_i = a_i + b_i z + ε_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorRegression {
    pub base: String,
    #[serde(skip)]
    pub series: Vec<String>,
    #[serde(skip)]
    pub tau: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub r_squared: Vec<f64>,
    /// Unnormalized residuals, series-major.
    #[serde(skip)]
    pub residuals: DMatrix<f64>,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    xs.sum::<f64>() / n
}

/// Regresses every row of `returns` on `factor` (normally `z_max` of the same panel).
pub fn remove_market_factor(returns: &ReturnPanel, factor: &Eigensignal) -> Result<FactorRegression> {
    let len = returns.len();
    if factor.values.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "factor has {} observations, panel has {len}",
            factor.values.len()
        )));
    }
    let z = &factor.values;
    let z_mean = mean(z.iter().copied());
    let zc: Vec<f64> = z.iter().map(|v| v - z_mean).collect();
    let szz: f64 = zc.iter().map(|v| v * v).sum();
    let var = szz / len as f64;
    if var.is_nan() || var <= 1e-12 {
        return Err(Error::ZeroVarianceRegressor);
    }

    let n = returns.n_series();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut r_squared = Vec::with_capacity(n);
    let mut residuals = DMatrix::zeros(n, len);
    for (i, row) in returns.g.row_iter().enumerate() {
        let g_mean = mean(row.iter().copied());
        let sgz: f64 = row.iter().zip(&zc).map(|(g, zc)| (g - g_mean) * zc).sum();
        let bi = sgz / szz;
        let ai = g_mean - bi * z_mean;
        let mut sse = 0.0;
        let mut sst = 0.0;
        for t in 0..len {
            let e = row[t] - ai - bi * z[t];
            residuals[(i, t)] = e;
            sse += e * e;
            sst += (row[t] - g_mean).powi(2);
        }
        a.push(ai);
        b.push(bi);
        r_squared.push(if sst > 0.0 { 1.0 - sse / sst } else { 0.0 });
    }
    Ok(FactorRegression {
        base: returns.base_label.clone(),
        series: returns.series.clone(),
        tau: returns.tau,
        a,
        b,
        r_squared,
        residuals,
    })
}

/// Residual std below which a series counts as fully explained by the factor.
/// The regressands have unit variance, so this is an absolute threshold.
const EXPLAINED_SIGMA: f64 = 1e-10;

/// Residuals renormalized to zero mean and unit variance, as a panel.
pub fn residual_panel(reg: &FactorRegression) -> Result<ReturnPanel> {
    let len = reg.residuals.ncols() as f64;
    for (i, row) in reg.residuals.row_iter().enumerate() {
        let m = row.sum() / len;
        let sigma = (row.iter().map(|e| (e - m).powi(2)).sum::<f64>() / len).sqrt();
        if sigma.is_nan() || sigma <= EXPLAINED_SIGMA {
            return Err(Error::ZeroVarianceResidual {
                asset: reg.series[i].clone(),
            });
        }
    }
    let g = normalize_rows(reg.residuals.clone(), &reg.series).map_err(|e| match e {
        Error::ConstantSeries { asset } => Error::ZeroVarianceResidual { asset },
        other => other,
    })?;
    Ok(ReturnPanel {
        base: None,
        base_label: reg.base.clone(),
        series: reg.series.clone(),
        tau: reg.tau,
        g,
    })
}

/// Correlation matrix of the residuals, each renormalized to zero mean and
/// unit variance first.
pub fn residual_correlation(reg: &FactorRegression) -> Result<CorrelationMatrix> {
    let panel = residual_panel(reg)?;
    correlation_from_normalized(&panel.g, panel.series, MatrixKind::Residual)
}

/// Which eigenvector components to histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Components {
    /// One eigenvector by ascending index.
    Single(usize),
    /// Every component of every eigenvector (N² values).
    All,
}

pub fn component_values(dec: &SpectralDecomposition, which: Components) -> Result<Vec<f64>> {
    match which {
        Components::All => Ok(dec.eigenvectors.iter().copied().collect()),
        Components::Single(k) if k < dec.n() => Ok(dec.eigenvectors.column(k).iter().copied().collect()),
        Components::Single(k) => Err(Error::DimensionMismatch(format!(
            "eigenvector index {k} out of range for dimension {}",
            dec.n()
        ))),
    }
}

pub fn component_histogram(dec: &SpectralDecomposition, which: Components, bins: BinSpec) -> Result<Histogram> {
    Histogram::from_values(&component_values(dec, which)?, bins)
}

/// Symmetric binning that just covers the components, rounded out to 0.05.
pub fn component_bins(dec: &SpectralDecomposition, bins: usize) -> Result<BinSpec> {
    let amax = dec.eigenvectors.amax().max(1e-3);
    let edge = ((amax / 0.05).ceil() * 0.05).min(1.0);
    BinSpec::new(-edge, edge, bins)
}

/// Normal distribution matched to a sample's mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std_dev: f64,
}

impl GaussianFit {
    pub fn from_histogram(h: &Histogram) -> Self {
        Self {
            mean: h.mean,
            std_dev: h.variance.sqrt(),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev;
        (-0.5 * z * z).exp() / (self.std_dev * (2.0 * PI).sqrt())
    }
}
