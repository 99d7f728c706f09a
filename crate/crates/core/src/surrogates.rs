//! Seeded null models and the planted one-factor market.
//!
//! * iid-random: every series independent standard normal returns.
//! * fictitious-base: an iid asset basket re-expressed in a fictitious currency.
//! * one-factor: `g_i = √c·f + √(1−c)·η_i`, population correlation `c`
//!   between any two series.

use chrono::{Duration, NaiveDate};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::PriceTable;
use crate::rebase::{rebase, BaseSelector};
use crate::rng;
use crate::spectra::{compute_returns, ReturnPanel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurrogateKind {
    IidRandom,
    FictitiousBase,
    OneFactor,
}

impl std::str::FromStr for SurrogateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" | "iid-random" => Ok(SurrogateKind::IidRandom),
            "fict" | "fictitious-base" => Ok(SurrogateKind::FictitiousBase),
            "one-factor" => Ok(SurrogateKind::OneFactor),
            other => Err(Error::InvalidSurrogate(format!("unknown kind {other:?}"))),
        }
    }
}

/// A fully determined surrogate: identical specs produce identical output.
///
/// `t` counts return observations; exported price tables have `t + 1` rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub kind: SurrogateKind,
    pub n: usize,
    pub t: usize,
    pub seed: u64,
    pub factor_loading: Option<f64>,
}

impl SurrogateSpec {
    pub fn iid(n: usize, t: usize, seed: u64) -> Self {
        Self {
            kind: SurrogateKind::IidRandom,
            n,
            t,
            seed,
            factor_loading: None,
        }
    }

    pub fn one_factor(n: usize, t: usize, c: f64, seed: u64) -> Self {
        Self {
            kind: SurrogateKind::OneFactor,
            n,
            t,
            seed,
            factor_loading: Some(c),
        }
    }

    pub fn fictitious_base(n: usize, t: usize, seed: u64) -> Self {
        Self {
            kind: SurrogateKind::FictitiousBase,
            n,
            t,
            seed,
            factor_loading: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSurrogate(format!("N must be >= 2, got {}", self.n)));
        }
        if self.t < 2 {
            return Err(Error::InvalidSurrogate(format!("T must be >= 2, got {}", self.t)));
        }
        match (self.kind, self.factor_loading) {
            (SurrogateKind::OneFactor, Some(c)) if (0.0..1.0).contains(&c) => Ok(()),
            (SurrogateKind::OneFactor, Some(c)) => Err(Error::InvalidSurrogate(format!(
                "factor loading must satisfy 0 <= c < 1, got {c}"
            ))),
            (SurrogateKind::OneFactor, None) => Err(Error::InvalidSurrogate(
                "one-factor surrogate needs a factor loading".into(),
            )),
            (_, Some(_)) => Err(Error::InvalidSurrogate(
                "factor loading only applies to one-factor surrogates".into(),
            )),
            (_, None) => Ok(()),
        }
    }

    fn expect(&self, kind: SurrogateKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidSurrogate(format!(
                "expected a {kind:?} spec, got {:?}",
                self.kind
            )));
        }
        self.validate()
    }
}

pub fn series_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("S{i:03}")).collect()
}

/// `n × t` iid standard normal draws from the panel stream of `seed`.
pub fn iid_log_returns(n: usize, t: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, rng::STREAM_PANEL);
    // fill series by series so a panel's first rows do not depend on t
    let mut m = DMatrix::zeros(n, t);
    for i in 0..n {
        for k in 0..t {
            m[(i, k)] = StandardNormal.sample(&mut rng);
        }
    }
    m
}

/// One-factor log returns. With `c = 0` this equals [`iid_log_returns`].
pub fn one_factor_log_returns(n: usize, t: usize, c: f64, seed: u64) -> DMatrix<f64> {
    let mut frng = rng::stream(seed, rng::STREAM_FACTOR);
    let f: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut frng)).collect();
    let (sf, se) = (c.sqrt(), (1.0 - c).sqrt());
    let mut m = iid_log_returns(n, t, seed);
    for i in 0..n {
        for k in 0..t {
            m[(i, k)] = sf * f[k] + se * m[(i, k)];
        }
    }
    m
}

pub fn generate_iid_panel(spec: &SurrogateSpec) -> Result<ReturnPanel> {
    spec.expect(SurrogateKind::IidRandom)?;
    ReturnPanel::from_raw(
        None,
        "random",
        series_names(spec.n),
        1,
        iid_log_returns(spec.n, spec.t, spec.seed),
    )
}

pub fn generate_one_factor_panel(spec: &SurrogateSpec) -> Result<ReturnPanel> {
    spec.expect(SurrogateKind::OneFactor)?;
    let c = spec.factor_loading.unwrap_or_default();
    ReturnPanel::from_raw(
        None,
        format!("one-factor(c={c})"),
        series_names(spec.n),
        1,
        one_factor_log_returns(spec.n, spec.t, c, spec.seed),
    )
}

/// Normalized returns of an iid basket seen from a fictitious currency.
pub fn generate_fictitious_base_panel(spec: &SurrogateSpec) -> Result<ReturnPanel> {
    spec.expect(SurrogateKind::FictitiousBase)?;
    let usd = prices_from_log_returns(
        series_names(spec.n),
        &iid_log_returns(spec.n, spec.t, spec.seed),
        default_start(),
        "USD",
    )?;
    let panel = rebase(&usd, &BaseSelector::Fictitious { seed: spec.seed })?;
    compute_returns(&panel, 1)
}

pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 10, 1).expect("valid date")
}

/// Daily prices starting at 1 whose consecutive log ratios are the columns
/// of `log_returns` (series-major). Produces `t + 1` rows.
pub fn prices_from_log_returns(
    names: Vec<String>,
    log_returns: &DMatrix<f64>,
    start: NaiveDate,
    quote: &str,
) -> Result<PriceTable> {
    let (n, t) = log_returns.shape();
    let mut prices = DMatrix::zeros(t + 1, n);
    for i in 0..n {
        let mut level = 0.0;
        prices[(0, i)] = 1.0;
        for k in 0..t {
            level += log_returns[(i, k)];
            prices[(k + 1, i)] = level.exp();
        }
    }
    let dates = (0..=t).map(|k| start + Duration::days(k as i64)).collect();
    PriceTable::new(dates, names, quote, prices)
}

/// The surrogate as a price table in the ingestible CSV dialect.
///
/// iid and one-factor tables are quoted in `USD`; the fictitious-base table
/// is the iid basket re-expressed in the fictitious currency, quoted in `FICT`.
pub fn surrogate_price_table(spec: &SurrogateSpec, start: NaiveDate) -> Result<PriceTable> {
    spec.validate()?;
    let names = series_names(spec.n);
    match spec.kind {
        SurrogateKind::IidRandom => {
            prices_from_log_returns(names, &iid_log_returns(spec.n, spec.t, spec.seed), start, "USD")
        }
        SurrogateKind::OneFactor => prices_from_log_returns(
            names,
            &one_factor_log_returns(spec.n, spec.t, spec.factor_loading.unwrap_or_default(), spec.seed),
            start,
            "USD",
        ),
        SurrogateKind::FictitiousBase => {
            let usd = prices_from_log_returns(names, &iid_log_returns(spec.n, spec.t, spec.seed), start, "USD")?;
            let panel = rebase(&usd, &BaseSelector::Fictitious { seed: spec.seed })?;
            PriceTable::new(panel.dates, panel.assets, "FICT", panel.prices.transpose())
        }
    }
}
