//! Re-expressing prices in a chosen base: the quote currency, one of the
//! assets, or a seeded fictitious currency unrelated to the market.

use std::fmt;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::PriceTable;
use crate::rng;

/// Which denominator the panel is expressed in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseSelector {
    /// The table's own quote currency (identity rebase).
    Quote,
    /// One of the table's assets; it drops out of the panel.
    Asset { asset_id: String },
    /// A synthetic currency whose quote/fict rate is a seeded geometric random walk.
    Fictitious { seed: u64 },
}

impl BaseSelector {
    pub fn asset(ticker: impl Into<String>) -> Self {
        BaseSelector::Asset {
            asset_id: ticker.into(),
        }
    }

    /// Parses a `--base` value: `quote`, `fict` (needs `seed`) or a ticker.
    pub fn parse(s: &str, seed: Option<u64>) -> Result<Self> {
        match s {
            "quote" => Ok(BaseSelector::Quote),
            "fict" => seed
                .map(|seed| BaseSelector::Fictitious { seed })
                .ok_or_else(|| Error::Usage("base `fict` requires --seed".into())),
            "" => Err(Error::Usage("empty base".into())),
            t => Ok(BaseSelector::asset(t)),
        }
    }

    /// Human label; the quote base is named after the table's quote currency.
    pub fn label(&self, quote: &str) -> String {
        match self {
            BaseSelector::Quote => quote.to_string(),
            BaseSelector::Asset { asset_id } => asset_id.clone(),
            BaseSelector::Fictitious { .. } => "fict".to_string(),
        }
    }
}

impl fmt::Display for BaseSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseSelector::Quote => f.write_str("quote"),
            BaseSelector::Asset { asset_id } => f.write_str(asset_id),
            BaseSelector::Fictitious { seed } => write!(f, "fict(seed={seed})"),
        }
    }
}

/// Prices of the non-base assets expressed in the base, series-major:
/// `prices[(i, t)]` is asset `i` on `dates[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RebasedPanel {
    pub base: BaseSelector,
    pub base_label: String,
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    pub prices: DMatrix<f64>,
}

impl RebasedPanel {
    pub fn n_series(&self) -> usize {
        self.assets.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Columns `start..start+len` of the panel.
    pub fn window(&self, start: usize, len: usize) -> RebasedPanel {
        RebasedPanel {
            base: self.base.clone(),
            base_label: self.base_label.clone(),
            dates: self.dates[start..start + len].to_vec(),
            assets: self.assets.clone(),
            prices: self.prices.columns(start, len).into_owned(),
        }
    }
}

/// quote/fict exchange rate of length `len`: starts at 1, daily log-increments
/// iid standard normal drawn from the seed's fictitious stream. No drift
/// correction is applied.
pub fn generate_fictitious_series(len: usize, seed: u64) -> Result<Vec<f64>> {
    if len < 2 {
        return Err(Error::SeriesTooShort(len));
    }
    let mut rng = rng::stream(seed, rng::STREAM_FICTITIOUS);
    let mut log_u = 0.0f64;
    let mut out = Vec::with_capacity(len);
    out.push(1.0);
    for _ in 1..len {
        let step: f64 = StandardNormal.sample(&mut rng);
        log_u += step;
        out.push(log_u.exp());
    }
    Ok(out)
}

/// Expresses every price in `base`. The table must be complete.
pub fn rebase(table: &PriceTable, base: &BaseSelector) -> Result<RebasedPanel> {
    if !table.is_complete() {
        return Err(Error::IncompleteSeries(table.gaps()));
    }
    let p = table.prices();
    let n_t = table.n_dates();
    let (assets, prices): (Vec<String>, DMatrix<f64>) = match base {
        BaseSelector::Quote => (table.assets().to_vec(), p.transpose()),
        BaseSelector::Asset { asset_id } => {
            let b = table
                .asset_index(asset_id)
                .ok_or_else(|| Error::UnknownBase(asset_id.clone()))?;
            let keep: Vec<usize> = (0..table.n_assets()).filter(|&i| i != b).collect();
            let prices = DMatrix::from_fn(keep.len(), n_t, |k, t| p[(t, keep[k])] / p[(t, b)]);
            (keep.iter().map(|&i| table.assets()[i].clone()).collect(), prices)
        }
        BaseSelector::Fictitious { seed } => {
            let u = generate_fictitious_series(n_t, *seed)?;
            let prices = DMatrix::from_fn(table.n_assets(), n_t, |i, t| p[(t, i)] * u[t]);
            (table.assets().to_vec(), prices)
        }
    };
    for i in 0..prices.nrows() {
        for t in 0..n_t {
            let v = prices[(i, t)];
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonFiniteRatio {
                    asset: assets[i].clone(),
                    date: table.dates()[t].to_string(),
                });
            }
        }
    }
    Ok(RebasedPanel {
        base: base.clone(),
        base_label: base.label(table.quote()),
        dates: table.dates().to_vec(),
        assets,
        prices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::PriceTable;
    use chrono::Duration;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn dates(n: usize) -> Vec<NaiveDate> {
        let d0 = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
        (0..n).map(|k| d0 + Duration::days(k as i64)).collect()
    }

    fn table(prices: DMatrix<f64>, names: &[&str]) -> PriceTable {
        PriceTable::new(
            dates(prices.nrows()),
            names.iter().map(|s| s.to_string()).collect(),
            "USD",
            prices,
        )
        .unwrap()
    }

    fn random_table(n: usize, t: usize, seed: u64) -> PriceTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let prices = DMatrix::from_fn(t, n, |_, _| rng.random_range(0.01..1000.0));
        let names: Vec<String> = (0..n).map(|i| format!("A{i}")).collect();
        PriceTable::new(dates(t), names, "USD", prices).unwrap()
    }

    #[test]
    fn quote_is_identity() {
        let t = random_table(4, 6, 1);
        let p = rebase(&t, &BaseSelector::Quote).unwrap();
        assert_eq!(p.prices, t.prices().transpose());
        assert_eq!(p.assets, t.assets());
        assert_eq!(p.base_label, "USD");
    }

    #[test]
    fn asset_base_arithmetic() {
        let t = table(
            DMatrix::from_row_slice(2, 2, &[100.0, 10.0, 200.0, 30.0]),
            &["BTC", "ETH"],
        );
        let p = rebase(&t, &BaseSelector::asset("BTC")).unwrap();
        assert_eq!(p.assets, ["ETH"]);
        assert!((p.prices[(0, 0)] - 0.1).abs() < 1e-15);
        assert!((p.prices[(0, 1)] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn unknown_base() {
        let t = random_table(3, 4, 2);
        assert!(matches!(
            rebase(&t, &BaseSelector::asset("XYZ")),
            Err(Error::UnknownBase(_))
        ));
    }

    #[test]
    fn triangle_identity_five_assets() {
        let t = random_table(5, 10, 7);
        for alpha in 0..5 {
            let a_id = &t.assets()[alpha];
            let pa = rebase(&t, &BaseSelector::asset(a_id.as_str())).unwrap();
            for beta in (0..5).filter(|&b| b != alpha) {
                let b_id = &t.assets()[beta];
                let pb = rebase(&t, &BaseSelector::asset(b_id.as_str())).unwrap();
                let row_b_in_a = pa.assets.iter().position(|s| s == b_id).unwrap();
                for (k, name) in pb.assets.iter().enumerate() {
                    for tt in 0..10 {
                        let via = if name == a_id {
                            1.0 / pa.prices[(row_b_in_a, tt)]
                        } else {
                            let r = pa.assets.iter().position(|s| s == name).unwrap();
                            pa.prices[(r, tt)] / pa.prices[(row_b_in_a, tt)]
                        };
                        let direct = pb.prices[(k, tt)];
                        assert!(((via - direct) / direct).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn fictitious_series_deterministic() {
        let a = generate_fictitious_series(50, 9).unwrap();
        let b = generate_fictitious_series(50, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], 1.0);
        assert_ne!(a, generate_fictitious_series(50, 10).unwrap());
        assert!(matches!(
            generate_fictitious_series(1, 0),
            Err(Error::SeriesTooShort(1))
        ));
    }

    #[test]
    fn fictitious_increment_moments() {
        let n = 100_000;
        let u = generate_fictitious_series(n + 1, 2024).unwrap();
        let inc: Vec<f64> = u.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
        let mean = inc.iter().sum::<f64>() / n as f64;
        let var = inc.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn fictitious_base_multiplies_by_rate() {
        let t = random_table(3, 8, 3);
        let u = generate_fictitious_series(8, 5).unwrap();
        let p = rebase(&t, &BaseSelector::Fictitious { seed: 5 }).unwrap();
        assert_eq!(p.n_series(), 3);
        for i in 0..3 {
            for (tt, ut) in u.iter().enumerate() {
                assert_eq!(p.prices[(i, tt)], t.prices()[(tt, i)] * ut);
            }
        }
    }

    proptest! {
        #[test]
        fn log_return_antisymmetry(seed in 0u64..1000, i in 0usize..4, a in 0usize..4) {
            prop_assume!(i != a);
            let t = random_table(4, 6, seed);
            let ti = t.assets()[i].clone();
            let ta = t.assets()[a].clone();
            let in_a = rebase(&t, &BaseSelector::asset(ta.as_str())).unwrap();
            let in_i = rebase(&t, &BaseSelector::asset(ti.as_str())).unwrap();
            let ri = in_a.assets.iter().position(|s| *s == ti).unwrap();
            let ra = in_i.assets.iter().position(|s| *s == ta).unwrap();
            for tt in 0..5 {
                let g_i = in_a.prices[(ri, tt + 1)].ln() - in_a.prices[(ri, tt)].ln();
                let g_a = in_i.prices[(ra, tt + 1)].ln() - in_i.prices[(ra, tt)].ln();
                prop_assert!((g_i + g_a).abs() <= 1e-12 * (1.0 + g_i.abs()));
            }
        }

        #[test]
        fn rebase_keeps_date_axis(seed in 0u64..1000, b in 0usize..4) {
            let t = random_table(4, 7, seed);
            let id = t.assets()[b].clone();
            let p = rebase(&t, &BaseSelector::asset(id.as_str())).unwrap();
            prop_assert_eq!(p.dates.as_slice(), t.dates());
            prop_assert_eq!(p.n_series(), 3);
            prop_assert!(!p.assets.contains(&id));
        }
    }
}
