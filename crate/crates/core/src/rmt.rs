//! Marchenko–Pastur reference for sample correlation matrices of
//! uncorrelated series: density, bulk edges, occupancy of the bulk and the
//! dimension rescaling used to compare ladders of mixed panel sizes.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_f64;
use crate::spectra::SpectralDecomposition;

/// Marchenko–Pastur law for `Q = T/N` and scale `sigma_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpReference {
    pub q: f64,
    pub sigma_w: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
}

impl MpReference {
    pub fn new(q: f64, sigma_w: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidMpParameters(format!("Q must be positive, got {q}")));
        }
        if !(sigma_w.is_finite() && sigma_w > 0.0) {
            return Err(Error::InvalidMpParameters(format!(
                "sigma_w must be positive, got {sigma_w}"
            )));
        }
        let s2 = sigma_w * sigma_w;
        let inv_q = 1.0 / q;
        let root = 2.0 * inv_q.sqrt();
        Ok(Self {
            q,
            sigma_w,
            lambda_minus: (s2 * (1.0 + inv_q - root)).max(0.0),
            lambda_plus: s2 * (1.0 + inv_q + root),
        })
    }

    /// Continuous part of the eigenvalue density; zero outside the bulk.
    pub fn density(&self, lambda: f64) -> f64 {
        if !(lambda > self.lambda_minus && lambda < self.lambda_plus) {
            return 0.0;
        }
        let radicand = (self.lambda_plus - lambda) * (lambda - self.lambda_minus);
        if radicand <= 0.0 {
            return 0.0;
        }
        self.q / (2.0 * PI * self.sigma_w * self.sigma_w) * radicand.sqrt() / lambda
    }

    /// `points` uniform samples of the density over
    /// `[max(0, 0.9·λ−), 1.1·λ+]`.
    pub fn overlay(&self, points: usize) -> Vec<(f64, f64)> {
        let lo = (0.9 * self.lambda_minus).max(0.0);
        let hi = 1.1 * self.lambda_plus;
        let step = if points > 1 {
            (hi - lo) / (points - 1) as f64
        } else {
            0.0
        };
        (0..points)
            .map(|k| {
                let x = if k + 1 == points { hi } else { lo + k as f64 * step };
                (x, self.density(x))
            })
            .collect()
    }

    /// CSV `lambda,density` with 512 samples.
    pub fn write_overlay_csv<W: Write>(&self, out: W) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "density"]).map_err(ser)?;
        for (x, d) in self.overlay(OVERLAY_POINTS) {
            w.write_record([format_f64(x), format_f64(d)]).map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

pub const OVERLAY_POINTS: usize = 512;

/// Bulk edges for `T` observations of `N` series.
pub fn mp_bounds(t: usize, n: usize, sigma_w: f64) -> Result<MpReference> {
    if t == 0 || n == 0 {
        return Err(Error::InvalidMpParameters(format!(
            "T and N must be positive, got T={t}, N={n}"
        )));
    }
    MpReference::new(t as f64 / n as f64, sigma_w)
}

/// Eigenvalue counts relative to the closed interval `[λ−, λ+]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupancy {
    pub below: usize,
    pub inside: usize,
    pub above: usize,
}

impl Occupancy {
    pub fn total(&self) -> usize {
        self.below + self.inside + self.above
    }

    pub fn inside_fraction(&self) -> f64 {
        self.inside as f64 / self.total() as f64
    }
}

pub fn bulk_occupancy(dec: &SpectralDecomposition, mp: &MpReference) -> Occupancy {
    occupancy_of(&dec.eigenvalues, mp)
}

pub fn occupancy_of(eigenvalues: &[f64], mp: &MpReference) -> Occupancy {
    let mut occ = Occupancy {
        below: 0,
        inside: 0,
        above: 0,
    };
    for &l in eigenvalues {
        if l < mp.lambda_minus {
            occ.below += 1;
        } else if l > mp.lambda_plus {
            occ.above += 1;
        } else {
            occ.inside += 1;
        }
    }
    occ
}

/// Rescales an eigenvalue from an `from_n`-series panel to `to_n` series
/// (e.g. quote-based n-series values onto the (n−1)-series asset ladder).
pub fn comparability_scale(lambda_max: f64, from_n: usize, to_n: usize) -> f64 {
    lambda_max * to_n as f64 / from_n as f64
}

/// How the bulk scale `σ_W` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    /// `σ_W = 1`.
    FixedUnit,
    /// `σ_W² = (N − Σ outliers)/N`, outliers being eigenvalues above the unit-scale λ+.
    TraceCompensated,
}

impl SigmaMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SigmaMode::FixedUnit => "fixed-unit",
            SigmaMode::TraceCompensated => "trace-compensated",
        }
    }
}

impl std::str::FromStr for SigmaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-unit" => Ok(SigmaMode::FixedUnit),
            "trace-compensated" => Ok(SigmaMode::TraceCompensated),
            other => Err(Error::Usage(format!(
                "unknown sigma mode {other:?} (expected fixed-unit or trace-compensated)"
            ))),
        }
    }
}

const SIGMA2_FLOOR: f64 = 1e-6;

/// MP reference for a spectrum computed from `t` observations.
pub fn fit_sigma(dec: &SpectralDecomposition, t: usize, mode: SigmaMode) -> Result<MpReference> {
    let n = dec.n();
    let unit = mp_bounds(t, n, 1.0)?;
    match mode {
        SigmaMode::FixedUnit => Ok(unit),
        SigmaMode::TraceCompensated => {
            let outliers: Vec<f64> = dec
                .eigenvalues
                .iter()
                .copied()
                .filter(|&l| l > unit.lambda_plus)
                .collect();
            if outliers.len() == n {
                return Err(Error::AllOutliers);
            }
            let s2 = ((n as f64 - outliers.iter().sum::<f64>()) / n as f64).max(SIGMA2_FLOOR);
            MpReference::new(unit.q, s2.sqrt())
        }
    }
}
