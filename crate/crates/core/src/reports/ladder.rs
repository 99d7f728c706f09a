use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::{load_input, ArtifactSet, InputArgs, OutDir, RunManifest};
use crate::error::{Error, Result};
use crate::market_data::PriceTable;
use crate::numfmt::format_f64;
use crate::rebase::{rebase, BaseSelector};
use crate::rmt::{comparability_scale, mp_bounds};
use crate::spectra::{compute_returns, correlation_matrix, decompose};

#[derive(Debug, Clone)]
pub struct LadderArgs {
    pub input: InputArgs,
    /// Seed of the fictitious base; required.
    pub seed: Option<u64>,
    pub tau: usize,
    pub out_dir: PathBuf,
}

impl LadderArgs {
    pub fn new(input: InputArgs, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input,
            seed: Some(seed),
            tau: 1,
            out_dir: out_dir.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub rank: usize,
    pub base: String,
    pub kind: &'static str,
    pub n_series: usize,
    pub lambda_max: f64,
    /// λ_max brought to the asset-base dimension `n − 1`.
    pub lambda_max_scaled: f64,
    pub explained_fraction: f64,
    /// Unit-scale bulk edge for `n − 1` series.
    pub lambda_plus: f64,
}

/// λ_max under every possible base, ranked from least to most correlated.
pub fn ladder_rows(table: &PriceTable, seed: u64, tau: usize) -> Result<Vec<LadderRow>> {
    let mut bases: Vec<BaseSelector> = table.assets().iter().map(BaseSelector::asset).collect();
    bases.push(BaseSelector::Quote);
    bases.push(BaseSelector::Fictitious { seed });
    let n_assets = table.n_assets();
    let t_ret = table
        .n_dates()
        .checked_sub(tau)
        .filter(|&t| t > 0)
        .ok_or(Error::InvalidLag {
            tau,
            len: table.n_dates(),
        })?;
    let lambda_plus = mp_bounds(t_ret, n_assets - 1, 1.0)?.lambda_plus;

    let mut rows: Vec<LadderRow> = bases
        .par_iter()
        .map(|base| {
            let returns = compute_returns(&rebase(table, base)?, tau)?;
            let dec = decompose(&correlation_matrix(&returns)?)?;
            let n = dec.n();
            Ok(LadderRow {
                rank: 0,
                base: returns.base_label.clone(),
                kind: match base {
                    BaseSelector::Quote => "quote",
                    BaseSelector::Asset { .. } => "asset",
                    BaseSelector::Fictitious { .. } => "fictitious",
                },
                n_series: n,
                lambda_max: dec.lambda_max(),
                lambda_max_scaled: comparability_scale(dec.lambda_max(), n, n_assets - 1),
                explained_fraction: dec.explained_fraction(),
                lambda_plus,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        a.lambda_max_scaled
            .total_cmp(&b.lambda_max_scaled)
            .then_with(|| a.base.cmp(&b.base))
    });
    for (k, row) in rows.iter_mut().enumerate() {
        row.rank = k + 1;
    }
    Ok(rows)
}

pub fn cmd_ladder(args: &LadderArgs, command_line: &[String]) -> Result<ArtifactSet> {
    let seed = args
        .seed
        .ok_or_else(|| Error::Usage("ladder includes the fictitious base and requires --seed".into()))?;
    let mut manifest = RunManifest::new("ladder", command_line);
    let table = load_input(&args.input, &mut manifest)?;
    manifest.seeds.insert("fictitious".into(), seed);
    manifest.param("tau", args.tau);
    let rows = ladder_rows(&table, seed, args.tau)?;

    let mut out = OutDir::create(&args.out_dir)?;
    out.write("ladder.csv", |w| {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "rank",
            "base",
            "kind",
            "n_series",
            "lambda_max",
            "lambda_max_scaled",
            "explained_fraction",
            "lambda_plus",
        ])
        .map_err(ser)?;
        for r in &rows {
            csv.write_record([
                r.rank.to_string(),
                r.base.clone(),
                r.kind.to_string(),
                r.n_series.to_string(),
                format_f64(r.lambda_max),
                format_f64(r.lambda_max_scaled),
                format_f64(r.explained_fraction),
                format_f64(r.lambda_plus),
            ])
            .map_err(ser)?;
        }
        csv.flush().map_err(|e| Error::Serialize(e.to_string()))
    })?;
    out.finish(manifest)
}
