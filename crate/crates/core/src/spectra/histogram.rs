use std::io::Write;

use serde::{Deserialize, Serialize};

use super::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::numfmt::format_f64;

/// Uniform binning of `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for BinSpec {
    /// 40 bins over [-1, 1].
    fn default() -> Self {
        Self {
            lo: -1.0,
            hi: 1.0,
            bins: 40,
        }
    }
}

impl BinSpec {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let spec = Self { lo, hi, bins };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unit(bins: usize) -> Result<Self> {
        Self::new(-1.0, 1.0, bins)
    }

    fn validate(&self) -> Result<()> {
        if self.bins == 0 {
            return Err(Error::InvalidBins("zero bins".into()));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidBins(format!(
                "range [{}, {}] is empty or not finite",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }
}

/// Counts of a sample over uniform bins, plus the sample's own moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub spec: BinSpec,
    pub counts: Vec<u64>,
    /// Values below `lo` / above `hi` (beyond a 1e-12 edge allowance).
    pub underflow: u64,
    pub overflow: u64,
    pub total: u64,
    pub mean: f64,
    pub variance: f64,
}

const EDGE_SLACK: f64 = 1e-12;

impl Histogram {
    pub fn from_values(values: &[f64], spec: BinSpec) -> Result<Self> {
        spec.validate()?;
        let mut counts = vec![0u64; spec.bins];
        let (mut underflow, mut overflow) = (0, 0);
        let width = spec.width();
        for &v in values {
            if v < spec.lo - EDGE_SLACK {
                underflow += 1;
            } else if v > spec.hi + EDGE_SLACK {
                overflow += 1;
            } else {
                let k = ((v - spec.lo) / width).floor().max(0.0) as usize;
                counts[k.min(spec.bins - 1)] += 1;
            }
        }
        let n = values.len() as f64;
        let mean = if values.is_empty() {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / n
        };
        let variance = if values.is_empty() {
            f64::NAN
        } else {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        };
        Ok(Self {
            spec,
            counts,
            underflow,
            overflow,
            total: values.len() as u64,
            mean,
            variance,
        })
    }

    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = self.spec.width();
        let left = self.spec.lo + k as f64 * w;
        let right = if k + 1 == self.spec.bins {
            self.spec.hi
        } else {
            self.spec.lo + (k + 1) as f64 * w
        };
        (left, right)
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        let (l, r) = self.bin_edges(k);
        0.5 * (l + r)
    }

    /// Density so that the histogram integrates to the in-range fraction.
    pub fn densities(&self) -> Vec<f64> {
        let norm = self.total as f64 * self.spec.width();
        self.counts
            .iter()
            .map(|&c| if norm > 0.0 { c as f64 / norm } else { 0.0 })
            .collect()
    }

    /// Center of the most populated bin (first one on ties).
    pub fn mode(&self) -> f64 {
        let k = self
            .counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (k, &c)| if c > best.1 { (k, c) } else { best })
            .0;
        self.bin_center(k)
    }

    /// CSV with columns `bin_left,bin_right,density`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.write_csv_with(out, &[])
    }

    /// As [`Histogram::write_csv`] plus extra named columns evaluated at each bin center.
    pub fn write_csv_with<W: Write>(&self, out: W, extra: &[(&str, &dyn Fn(f64) -> f64)]) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["bin_left", "bin_right", "density"];
        header.extend(extra.iter().map(|(name, _)| *name));
        w.write_record(&header).map_err(ser)?;
        for (k, d) in self.densities().into_iter().enumerate() {
            let (l, r) = self.bin_edges(k);
            let mut rec = vec![format_f64(l), format_f64(r), format_f64(d)];
            let c = self.bin_center(k);
            rec.extend(extra.iter().map(|(_, f)| format_f64(f(c))));
            w.write_record(&rec).map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Histogram of the off-diagonal upper-triangle entries of `c`.
/// The binning must cover [-1, 1].
pub fn element_histogram(c: &CorrelationMatrix, bins: BinSpec) -> Result<Histogram> {
    bins.validate()?;
    if bins.lo > -1.0 || bins.hi < 1.0 {
        return Err(Error::InvalidBins(format!(
            "[{}, {}] does not cover [-1, 1]",
            bins.lo, bins.hi
        )));
    }
    Histogram::from_values(&c.off_diagonal(), bins)
}
