use std::path::PathBuf;

use super::{file_label, load_input, ArtifactSet, InputArgs, OutDir, RunManifest};
use crate::error::{Error, Result};
use crate::rebase::BaseSelector;
use crate::rolling::{capitalization_shares, rolling_lambda_max, write_long_csv, RollingConfig};

#[derive(Debug, Clone)]
pub struct RollingArgs {
    pub input: InputArgs,
    /// Base names as accepted by [`BaseSelector::parse`].
    pub bases: Vec<String>,
    pub seed: Option<u64>,
    pub window: usize,
    pub step: usize,
    pub tau: usize,
    /// Assets whose capitalization share is tracked; requires caps.
    pub shares: Vec<String>,
    pub out_dir: PathBuf,
}

impl RollingArgs {
    pub fn new(input: InputArgs, out_dir: impl Into<PathBuf>) -> Self {
        let d = RollingConfig::default();
        Self {
            input,
            bases: vec!["quote".into()],
            seed: None,
            window: d.window,
            step: d.step,
            tau: d.tau,
            shares: Vec::new(),
            out_dir: out_dir.into(),
        }
    }
}

pub fn cmd_rolling(args: &RollingArgs, command_line: &[String]) -> Result<ArtifactSet> {
    let bases = args
        .bases
        .iter()
        .map(|b| BaseSelector::parse(b, args.seed))
        .collect::<Result<Vec<_>>>()?;
    if bases.is_empty() {
        return Err(Error::Usage("at least one base is required".into()));
    }
    if !args.shares.is_empty() && args.input.caps.is_none() {
        return Err(Error::MissingCaps);
    }
    let config = RollingConfig {
        window: args.window,
        step: args.step,
        bases,
        tau: args.tau,
    };

    let mut manifest = RunManifest::new("rolling", command_line);
    let table = load_input(&args.input, &mut manifest)?;
    if let Some(seed) = args.seed {
        if config
            .bases
            .iter()
            .any(|b| matches!(b, BaseSelector::Fictitious { .. }))
        {
            manifest.seeds.insert("fictitious".into(), seed);
        }
    }
    manifest.param("bases", &args.bases);
    manifest.param("window", args.window);
    manifest.param("step", args.step);
    manifest.param("tau", args.tau);
    manifest.param("shares", &args.shares);

    let series = rolling_lambda_max(&table, &config)?;
    for s in &series {
        manifest.notes.extend(
            config
                .warnings(s.n_series)
                .into_iter()
                .map(|w| format!("{}: {w}", s.base_label)),
        );
        for (date, asset) in &s.gaps {
            manifest.notes.push(format!(
                "{}: window ending {date} skipped, {asset} constant",
                s.base_label
            ));
        }
    }

    let mut out = OutDir::create(&args.out_dir)?;
    for s in &series {
        out.write(&format!("rolling_{}.csv", file_label(&s.base_label)), |w| {
            s.write_csv(w)
        })?;
    }
    out.write("rolling_long.csv", |w| write_long_csv(w, &series))?;
    if !args.shares.is_empty() {
        let shares = capitalization_shares(&table, &config, &args.shares)?;
        out.write("shares.csv", |w| shares.write_csv(w))?;
    }
    out.finish(manifest)
}
