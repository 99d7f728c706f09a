//! Command pipelines that tie the analysis modules together and write
//! plot-ready artifacts plus a run manifest into an output directory.
//!
//! Each `cmd_*` function is a pure function of its inputs, flags and seeds:
//! rerunning it reproduces every artifact byte for byte. The only field that
//! varies between runs is the manifest's `generated_at` wall-clock stamp.

mod ladder;
mod rolling;
mod spectrum;
mod surrogate;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::market_data::{align_and_filter, load_caps, load_price_table, MissingPolicy, PriceTable, TableFormat};
use crate::rng::GENERATOR;

pub use ladder::{cmd_ladder, ladder_rows, LadderArgs, LadderRow};
pub use rolling::{cmd_rolling, RollingArgs};
pub use spectrum::{cmd_spectrum, SpectrumArgs};
pub use surrogate::{cmd_surrogate, SurrogateArgs};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Where price data comes from and how gaps are handled.
#[derive(Debug, Clone, PartialEq)]
pub struct InputArgs {
    pub input: PathBuf,
    pub caps: Option<PathBuf>,
    pub quote: String,
    pub missing: MissingPolicy,
}

impl InputArgs {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            caps: None,
            quote: "USD".into(),
            missing: MissingPolicy::RejectIncomplete,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Provenance record written next to every artifact set.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub command_line: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seeds: BTreeMap<String, u64>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub generator: String,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub data_first_date: Option<String>,
    pub data_last_date: Option<String>,
    pub generated_at: String,
}

impl RunManifest {
    pub fn new(command: &str, command_line: &[String]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            command_line: command_line.to_vec(),
            inputs: Vec::new(),
            seeds: BTreeMap::new(),
            parameters: BTreeMap::new(),
            generator: GENERATOR.to_string(),
            outputs: Vec::new(),
            notes: Vec::new(),
            data_first_date: None,
            data_last_date: None,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    pub fn digest_input(&mut self, role: &str, path: &Path) -> Result<()> {
        let data = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(&data)),
        });
        Ok(())
    }

    fn record_table(&mut self, table: &PriceTable) {
        self.data_first_date = table.dates().first().map(|d| d.to_string());
        self.data_last_date = table.dates().last().map(|d| d.to_string());
    }
}

/// Files written by one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactSet {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

/// Collects output files for one run directory.
pub(crate) struct OutDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    pub(crate) fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub(crate) fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let io = |source| Error::Io {
            path: path.clone(),
            source,
        };
        let file = fs::File::create(&path).map_err(io)?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Serialize(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| Error::Serialize(e.to_string()))
        })
    }

    pub(crate) fn finish(mut self, mut manifest: RunManifest) -> Result<ArtifactSet> {
        manifest.outputs = self.files.clone();
        self.write_json(MANIFEST_FILE, &manifest)?;
        Ok(ArtifactSet {
            out_dir: self.dir,
            files: self.files,
        })
    }
}

/// Loads, optionally attaches caps, and completes the table per policy.
pub(crate) fn load_input(args: &InputArgs, manifest: &mut RunManifest) -> Result<PriceTable> {
    let format = TableFormat::default();
    manifest.digest_input("prices", &args.input)?;
    let mut table = load_price_table(&args.input, format, &args.quote)?;
    if let Some(caps) = &args.caps {
        manifest.digest_input("caps", caps)?;
        table = load_caps(caps, format, table)?;
    }
    let report = align_and_filter(&table, args.missing)?;
    if !report.removed.is_empty() {
        manifest.notes.push(format!(
            "dropped {} incomplete asset(s): {}",
            report.removed.len(),
            report.removed.join(", ")
        ));
    }
    manifest.param("quote", &args.quote);
    manifest.param(
        "missing",
        match args.missing {
            MissingPolicy::RejectIncomplete => "reject",
            MissingPolicy::DropIncompleteAssets => "drop",
        },
    );
    manifest.record_table(&report.table);
    Ok(report.table)
}

/// Filesystem-safe form of a base label.
pub(crate) fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
