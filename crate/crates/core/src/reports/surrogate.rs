use std::path::PathBuf;

use chrono::NaiveDate;

use super::{ArtifactSet, OutDir, RunManifest};
use crate::error::{Error, Result};
use crate::surrogates::{default_start, surrogate_price_table, SurrogateKind, SurrogateSpec};

#[derive(Debug, Clone)]
pub struct SurrogateArgs {
    pub kind: SurrogateKind,
    pub n: usize,
    /// Number of returns; the table has one more row.
    pub t: usize,
    pub seed: Option<u64>,
    pub factor_loading: Option<f64>,
    pub start: Option<NaiveDate>,
    pub out_dir: PathBuf,
}

/// Writes a surrogate as `prices.csv`, ready to feed back into the other commands.
pub fn cmd_surrogate(args: &SurrogateArgs, command_line: &[String]) -> Result<ArtifactSet> {
    let seed = args
        .seed
        .ok_or_else(|| Error::Usage("surrogate generation requires --seed".into()))?;
    let spec = SurrogateSpec {
        kind: args.kind,
        n: args.n,
        t: args.t,
        seed,
        factor_loading: args.factor_loading,
    };
    let start = args.start.unwrap_or_else(default_start);
    let table = surrogate_price_table(&spec, start)?;

    let mut manifest = RunManifest::new("surrogate", command_line);
    manifest.seeds.insert("surrogate".into(), seed);
    manifest.param("spec", spec);
    manifest.param("start", start.to_string());
    manifest.record_table(&table);

    let mut out = OutDir::create(&args.out_dir)?;
    out.write("prices.csv", |w| table.write_csv(w))?;
    out.finish(manifest)
}
