//! Normalized returns, correlation matrices, spectral decomposition,
//! eigensignals and matrix-element histograms.

mod correlation;
mod decompose;
mod histogram;
mod returns;

pub(crate) use correlation::correlation_from_normalized;
pub use correlation::{correlation_matrix, CorrelationMatrix, MatrixKind};
pub use decompose::{decompose, eigensignal, eigensignals, Eigensignal, SpectralDecomposition};
pub use histogram::{element_histogram, BinSpec, Histogram};
pub use returns::{compute_returns, normalize_rows, ReturnPanel};
