//! Largest eigenvalue per base over a sliding window, and capitalization
//! shares sampled at the same window end dates.
//!
//! Every window is computed from scratch: the slice is re-normalized on its
//! own and nothing is carried between windows. Windows run in parallel; the
//! output order only depends on window position.

use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market_data::{PriceTable, DATE_FORMAT};
use crate::numfmt::format_f64;
use crate::rebase::{rebase, BaseSelector};
use crate::rmt::{mp_bounds, occupancy_of};
use crate::spectra::{compute_returns, correlation_matrix, decompose};

#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    /// Window length in price days.
    pub window: usize,
    pub step: usize,
    pub bases: Vec<BaseSelector>,
    pub tau: usize,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self {
            window: 182,
            step: 1,
            bases: vec![BaseSelector::Quote],
            tau: 1,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self, n_dates: usize) -> Result<()> {
        if self.step == 0 {
            return Err(Error::InvalidRolling("step must be >= 1".into()));
        }
        if self.tau == 0 || self.window <= self.tau {
            return Err(Error::InvalidRolling(format!(
                "window ({}) must exceed tau ({}) and tau must be >= 1",
                self.window, self.tau
            )));
        }
        if self.window > n_dates {
            return Err(Error::InvalidRolling(format!(
                "window of {} days exceeds the {} available",
                self.window, n_dates
            )));
        }
        Ok(())
    }

    /// Non-fatal remarks, e.g. fewer observations per window than series.
    pub fn warnings(&self, n_series: usize) -> Vec<String> {
        let obs = self.window.saturating_sub(self.tau);
        if obs < n_series {
            vec![format!(
                "window yields {obs} returns for {n_series} series (Q < 1): the spectrum has zero modes"
            )]
        } else {
            Vec::new()
        }
    }

    pub fn window_count(&self, n_dates: usize) -> usize {
        window_count(n_dates, self.window, self.step)
    }

    /// (first row, end date) of every window.
    fn positions<'a>(&self, dates: &'a [NaiveDate]) -> impl Iterator<Item = (usize, NaiveDate)> + 'a {
        let (window, step) = (self.window, self.step);
        (0..window_count(dates.len(), window, step)).map(move |k| {
            let start = k * step;
            (start, dates[start + window - 1])
        })
    }
}

/// `floor((T − window)/step) + 1`, or 0 when the window does not fit.
pub fn window_count(n_dates: usize, window: usize, step: usize) -> usize {
    if window > n_dates || step == 0 {
        0
    } else {
        (n_dates - window) / step + 1
    }
}

/// λ_max per window for one base. `None` marks a window where some series
/// was constant.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingSeries {
    pub base: BaseSelector,
    pub base_label: String,
    pub n_series: usize,
    pub end_dates: Vec<NaiveDate>,
    pub lambda_max: Vec<Option<f64>>,
    pub n_above_bulk: Vec<Option<usize>>,
    /// λ+ for σ_W = 1 and Q = (window − tau)/N; the same for every window.
    pub lambda_plus: f64,
    /// (end date, series) for windows skipped because of a constant series.
    pub gaps: Vec<(NaiveDate, String)>,
}

impl RollingSeries {
    pub fn len(&self) -> usize {
        self.end_dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.end_dates.is_empty()
    }

    /// CSV `end_date,lambda_max,lambda_plus,n_above_bulk`; gaps are empty cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, std::slice::from_ref(self), false)
    }
}

/// Long format over several bases: `base,end_date,lambda_max,lambda_plus,n_above_bulk`.
pub fn write_long_csv<W: Write>(out: W, series: &[RollingSeries]) -> Result<()> {
    write_rows(out, series, true)
}

fn write_rows<W: Write>(out: W, series: &[RollingSeries], with_base: bool) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["end_date", "lambda_max", "lambda_plus", "n_above_bulk"];
    if with_base {
        header.insert(0, "base");
    }
    w.write_record(&header).map_err(ser)?;
    for s in series {
        for k in 0..s.len() {
            let mut rec = Vec::with_capacity(5);
            if with_base {
                rec.push(s.base_label.clone());
            }
            rec.push(s.end_dates[k].format(DATE_FORMAT).to_string());
            rec.push(s.lambda_max[k].map(format_f64).unwrap_or_default());
            rec.push(format_f64(s.lambda_plus));
            rec.push(s.n_above_bulk[k].map(|c| c.to_string()).unwrap_or_default());
            w.write_record(&rec).map_err(ser)?;
        }
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))
}

enum WindowOutcome {
    Value { lambda_max: f64, above: usize },
    Gap(String),
}

/// Rolling λ_max for every configured base. The fictitious base is generated
/// once over the whole table, so consecutive windows share one path.
pub fn rolling_lambda_max(table: &PriceTable, config: &RollingConfig) -> Result<Vec<RollingSeries>> {
    config.validate(table.n_dates())?;
    config
        .bases
        .iter()
        .map(|base| rolling_for_base(table, config, base))
        .collect()
}

fn rolling_for_base(table: &PriceTable, config: &RollingConfig, base: &BaseSelector) -> Result<RollingSeries> {
    let panel = rebase(table, base)?;
    let n = panel.n_series();
    let bulk = mp_bounds(config.window - config.tau, n, 1.0)?;
    let positions: Vec<(usize, NaiveDate)> = config.positions(table.dates()).collect();

    let outcomes: Vec<Result<WindowOutcome>> = positions
        .par_iter()
        .map(|&(start, _)| {
            let slice = panel.window(start, config.window);
            let returns = match compute_returns(&slice, config.tau) {
                Ok(r) => r,
                Err(Error::ConstantSeries { asset }) => return Ok(WindowOutcome::Gap(asset)),
                Err(e) => return Err(e),
            };
            let dec = decompose(&correlation_matrix(&returns)?)?;
            Ok(WindowOutcome::Value {
                lambda_max: dec.lambda_max(),
                above: occupancy_of(&dec.eigenvalues, &bulk).above,
            })
        })
        .collect();

    let mut series = RollingSeries {
        base: base.clone(),
        base_label: panel.base_label.clone(),
        n_series: n,
        end_dates: Vec::with_capacity(positions.len()),
        lambda_max: Vec::with_capacity(positions.len()),
        n_above_bulk: Vec::with_capacity(positions.len()),
        lambda_plus: bulk.lambda_plus,
        gaps: Vec::new(),
    };
    for ((_, end), outcome) in positions.into_iter().zip(outcomes) {
        series.end_dates.push(end);
        match outcome? {
            WindowOutcome::Value { lambda_max, above } => {
                series.lambda_max.push(Some(lambda_max));
                series.n_above_bulk.push(Some(above));
            }
            WindowOutcome::Gap(asset) => {
                series.lambda_max.push(None);
                series.n_above_bulk.push(None);
                series.gaps.push((end, asset));
            }
        }
    }
    Ok(series)
}

/// Total capitalization and per-asset shares at each window end date.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareSeries {
    pub end_dates: Vec<NaiveDate>,
    pub total: Vec<f64>,
    pub assets: Vec<String>,
    /// `shares[a][k]`: share of `assets[a]` at `end_dates[k]`.
    pub shares: Vec<Vec<f64>>,
}

impl ShareSeries {
    /// CSV `end_date,total_cap,share_<asset>,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["end_date".to_string(), "total_cap".to_string()];
        header.extend(self.assets.iter().map(|a| format!("share_{a}")));
        w.write_record(&header).map_err(ser)?;
        for k in 0..self.end_dates.len() {
            let mut rec = vec![
                self.end_dates[k].format(DATE_FORMAT).to_string(),
                format_f64(self.total[k]),
            ];
            rec.extend(self.shares.iter().map(|s| format_f64(s[k])));
            w.write_record(&rec).map_err(ser)?;
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Capitalization at the last day of each window: market total and the share
/// of each requested asset. Missing capitalization cells count as zero.
pub fn capitalization_shares(table: &PriceTable, config: &RollingConfig, assets: &[String]) -> Result<ShareSeries> {
    let caps = table.caps().ok_or(Error::MissingCaps)?;
    config.validate(table.n_dates())?;
    let cols: Vec<usize> = assets
        .iter()
        .map(|a| table.asset_index(a).ok_or_else(|| Error::UnknownBase(a.clone())))
        .collect::<Result<_>>()?;
    let cap = |t: usize, i: usize| {
        let c = caps[(t, i)];
        if c.is_nan() {
            0.0
        } else {
            c
        }
    };

    let mut out = ShareSeries {
        end_dates: Vec::new(),
        total: Vec::new(),
        assets: assets.to_vec(),
        shares: vec![Vec::new(); assets.len()],
    };
    for (start, end) in config.positions(table.dates()) {
        let t = start + config.window - 1;
        let total: f64 = (0..table.n_assets()).map(|i| cap(t, i)).sum();
        if total <= 0.0 {
            return Err(Error::ZeroCapitalization(end.to_string()));
        }
        out.end_dates.push(end);
        out.total.push(total);
        for (s, &i) in out.shares.iter_mut().zip(&cols) {
            s.push(cap(t, i) / total);
        }
    }
    Ok(out)
}
