//! Post-hoc verification of the spectral identities a pipeline run must
//! satisfy. Every command runs these and refuses to emit results that fail.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_mode::FactorRegression;
use crate::spectra::{eigensignals, CorrelationMatrix, Eigensignal, ReturnPanel, SpectralDecomposition};

pub const TRACE_TOL: f64 = 1e-10;
pub const EIGENSUM_TOL: f64 = 1e-8;
pub const ORTHONORMAL_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Relative; near-zero eigenvalues get an absolute floor of 1e-12.
pub const SIGNAL_VARIANCE_REL_TOL: f64 = 1e-8;
pub const SIGNAL_VARIANCE_ABS_FLOOR: f64 = 1e-12;
pub const OLS_TOL: f64 = 1e-10;

/// Observed errors of each identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralChecks {
    /// |Tr C − N|
    pub trace_error: f64,
    /// |Σλ − N|
    pub eigensum_error: f64,
    /// max |VᵀV − I|
    pub orthonormality_error: f64,
    /// max |C − VΛVᵀ|
    pub reconstruction_error: f64,
    /// max over i of |var(z_i) − λ_i| / max(|λ_i|, floor)
    pub signal_variance_rel_error: f64,
}

impl SpectralChecks {
    pub fn compute(returns: &ReturnPanel, c: &CorrelationMatrix, dec: &SpectralDecomposition) -> Result<Self> {
        let n = c.n() as f64;
        let signals = eigensignals(returns, dec)?;
        Ok(Self {
            trace_error: (c.trace() - n).abs(),
            eigensum_error: (dec.eigenvalues.iter().sum::<f64>() - n).abs(),
            orthonormality_error: dec.orthonormality_error(),
            reconstruction_error: dec.reconstruction_error(c),
            signal_variance_rel_error: signal_variance_error(&signals, &dec.eigenvalues),
        })
    }

    pub fn passed(&self) -> bool {
        self.trace_error <= TRACE_TOL
            && self.eigensum_error <= EIGENSUM_TOL
            && self.orthonormality_error <= ORTHONORMAL_TOL
            && self.reconstruction_error <= RECONSTRUCTION_TOL
            && self.signal_variance_rel_error <= SIGNAL_VARIANCE_REL_TOL
    }

    pub fn ensure(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::IdentityViolated(format!("{self:?}")))
        }
    }
}

/// Worst scaled deviation of `var(z_i)` from `λ_i`.
pub fn signal_variance_error(signals: &[Eigensignal], eigenvalues: &[f64]) -> f64 {
    signals
        .iter()
        .zip(eigenvalues)
        .map(|(z, &l)| {
            let scale = l.abs().max(SIGNAL_VARIANCE_ABS_FLOOR / SIGNAL_VARIANCE_REL_TOL);
            (z.variance() - l).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Largest |cov(ε_i, z)| and |mean(ε_i)| over all series.
pub fn ols_orthogonality(reg: &FactorRegression, factor: &Eigensignal) -> f64 {
    let len = factor.values.len() as f64;
    let z_mean = factor.values.iter().sum::<f64>() / len;
    reg.residuals
        .row_iter()
        .map(|e| {
            let e_mean = e.sum() / len;
            let cov = e
                .iter()
                .zip(&factor.values)
                .map(|(e, z)| (e - e_mean) * (z - z_mean))
                .sum::<f64>()
                / len;
            cov.abs().max(e_mean.abs())
        })
        .fold(0.0, f64::max)
}
