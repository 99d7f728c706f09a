use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rebase::{BaseSelector, RebasedPanel};

/// Per-series normalized log returns, series-major (`g[(i, t)]`).
///
/// Each row has zero mean and unit standard deviation under the 1/T
/// (population) convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    /// `None` for panels that were never rebased (synthetic surrogates).
    pub base: Option<BaseSelector>,
    pub base_label: String,
    pub series: Vec<String>,
    pub tau: usize,
    pub g: DMatrix<f64>,
}

impl ReturnPanel {
    /// Normalizes raw returns row by row. Fails on a constant row.
    pub fn from_raw(
        base: Option<BaseSelector>,
        base_label: impl Into<String>,
        series: Vec<String>,
        tau: usize,
        raw: DMatrix<f64>,
    ) -> Result<Self> {
        if series.len() != raw.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} series names for {} rows",
                series.len(),
                raw.nrows()
            )));
        }
        let g = normalize_rows(raw, &series)?;
        Ok(Self {
            base,
            base_label: base_label.into(),
            series,
            tau,
            g,
        })
    }

    pub fn n_series(&self) -> usize {
        self.g.nrows()
    }

    /// Number of return observations.
    pub fn len(&self) -> usize {
        self.g.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.g.ncols() == 0
    }
}

/// Demeans each row and scales it to unit population standard deviation.
///
/// A row whose spread is at rounding level relative to its magnitude is
/// treated as constant: normalizing it would only amplify rounding noise.
pub fn normalize_rows(mut raw: DMatrix<f64>, names: &[String]) -> Result<DMatrix<f64>> {
    let len = raw.ncols() as f64;
    for (i, mut row) in raw.row_iter_mut().enumerate() {
        let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mean = row.sum() / len;
        row.add_scalar_mut(-mean);
        let sigma = (row.norm_squared() / len).sqrt();
        if !sigma.is_finite() || sigma <= 1e-12 * scale || sigma == 0.0 {
            return Err(Error::ConstantSeries {
                asset: names.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
            });
        }
        row.scale_mut(1.0 / sigma);
        // second pass removes the residual mean left by rounding
        let drift = row.sum() / len;
        row.add_scalar_mut(-drift);
    }
    Ok(raw)
}

/// Log returns at lag `tau` (stride 1), normalized per series.
pub fn compute_returns(panel: &RebasedPanel, tau: usize) -> Result<ReturnPanel> {
    if tau == 0 || panel.len() <= tau {
        return Err(Error::InvalidLag { tau, len: panel.len() });
    }
    let len = panel.len() - tau;
    let logp = panel.prices.map(f64::ln);
    let raw = DMatrix::from_fn(panel.n_series(), len, |i, t| logp[(i, t + tau)] - logp[(i, t)]);
    ReturnPanel::from_raw(
        Some(panel.base.clone()),
        panel.base_label.clone(),
        panel.assets.clone(),
        tau,
        raw,
    )
}
