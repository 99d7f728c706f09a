use std::path::PathBuf;

use serde::Serialize;

use super::{load_input, ArtifactSet, InputArgs, OutDir, RunManifest};
use crate::checks::{ols_orthogonality, SpectralChecks, OLS_TOL};
use crate::error::{Error, Result};
use crate::market_mode::{
    component_bins, component_histogram, remove_market_factor, residual_panel, Components, FactorRegression,
    GaussianFit,
};
use crate::numfmt::format_f64;
use crate::rebase::{rebase, BaseSelector};
use crate::rmt::{bulk_occupancy, fit_sigma, MpReference, Occupancy, SigmaMode};
use crate::spectra::{
    compute_returns, correlation_from_normalized, decompose, eigensignal, element_histogram, BinSpec,
    CorrelationMatrix, MatrixKind, ReturnPanel, SpectralDecomposition,
};

#[derive(Debug, Clone)]
pub struct SpectrumArgs {
    pub input: InputArgs,
    /// `quote`, `fict` or a ticker.
    pub base: String,
    pub seed: Option<u64>,
    pub tau: usize,
    pub remove_market: bool,
    pub sigma_mode: SigmaMode,
    pub bins: usize,
    /// Include full eigenvector matrices in the JSON output.
    pub eigenvectors: bool,
    pub out_dir: PathBuf,
}

impl SpectrumArgs {
    pub fn new(input: InputArgs, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input,
            base: "quote".into(),
            seed: None,
            tau: 1,
            remove_market: false,
            sigma_mode: SigmaMode::FixedUnit,
            bins: 40,
            eigenvectors: false,
            out_dir: out_dir.into(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SpectrumReport<'a> {
    base: &'a str,
    base_selector: &'a BaseSelector,
    matrix: MatrixKind,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    tau: usize,
    eigenvalues: &'a [f64],
    lambda_max: f64,
    explained_fraction: f64,
    sigma_mode: &'static str,
    marchenko_pastur: MpReference,
    occupancy: Occupancy,
    mean_off_diagonal: f64,
    checks: SpectralChecks,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvectors: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize)]
struct RegressionReport<'a> {
    #[serde(flatten)]
    regression: &'a FactorRegression,
    series: &'a [String],
    max_ols_orthogonality_error: f64,
}

/// Spectrum of one base: eigenvalues with MP comparison, element and
/// component histograms, and optionally the same for the residual matrix.
pub fn cmd_spectrum(args: &SpectrumArgs, command_line: &[String]) -> Result<ArtifactSet> {
    let mut manifest = RunManifest::new("spectrum", command_line);
    let base = BaseSelector::parse(&args.base, args.seed)?;
    let bins = BinSpec::unit(args.bins)?;
    let table = load_input(&args.input, &mut manifest)?;
    if let Some(seed) = args.seed {
        manifest.seeds.insert("fictitious".into(), seed);
    }
    manifest.param("base", &args.base);
    manifest.param("tau", args.tau);
    manifest.param("remove_market", args.remove_market);
    manifest.param("sigma_mode", args.sigma_mode.as_str());
    manifest.param("bins", args.bins);

    let panel = rebase(&table, &base)?;
    let returns = compute_returns(&panel, args.tau)?;
    let c = correlation_from_normalized(&returns.g, returns.series.clone(), MatrixKind::Raw)?;
    let dec = decompose(&c)?;

    let mut out = OutDir::create(&args.out_dir)?;
    write_matrix_artifacts(&mut out, "", args, &base, &returns, &c, &dec, bins)?;

    if args.remove_market {
        let z_max = eigensignal(&returns, &dec, dec.n() - 1)?;
        let reg = remove_market_factor(&returns, &z_max)?;
        let ortho = ols_orthogonality(&reg, &z_max);
        if ortho > OLS_TOL {
            return Err(Error::IdentityViolated(format!(
                "OLS residuals not orthogonal to the factor: {ortho:e}"
            )));
        }
        out.write_json(
            "factor_regression.json",
            &RegressionReport {
                regression: &reg,
                series: &reg.series,
                max_ols_orthogonality_error: ortho,
            },
        )?;
        let resid = residual_panel(&reg)?;
        let r = correlation_from_normalized(&resid.g, resid.series.clone(), MatrixKind::Residual)?;
        let dec_r = decompose(&r)?;
        write_matrix_artifacts(&mut out, "residual_", args, &base, &resid, &r, &dec_r, bins)?;
    }

    out.finish(manifest)
}

#[allow(clippy::too_many_arguments)]
fn write_matrix_artifacts(
    out: &mut OutDir,
    prefix: &str,
    args: &SpectrumArgs,
    base: &BaseSelector,
    returns: &ReturnPanel,
    c: &CorrelationMatrix,
    dec: &SpectralDecomposition,
    bins: BinSpec,
) -> Result<()> {
    let checks = SpectralChecks::compute(returns, c, dec)?.ensure()?;
    let mp = fit_sigma(dec, returns.len(), args.sigma_mode)?;
    let elements = element_histogram(c, bins)?;

    let report = SpectrumReport {
        base: &returns.base_label,
        base_selector: base,
        matrix: c.kind,
        n: dec.n(),
        t: returns.len(),
        tau: args.tau,
        eigenvalues: &dec.eigenvalues,
        lambda_max: dec.lambda_max(),
        explained_fraction: dec.explained_fraction(),
        sigma_mode: args.sigma_mode.as_str(),
        marchenko_pastur: mp,
        occupancy: bulk_occupancy(dec, &mp),
        mean_off_diagonal: elements.mean,
        checks,
        eigenvectors: args.eigenvectors.then(|| {
            dec.eigenvectors
                .column_iter()
                .map(|v| v.iter().copied().collect())
                .collect()
        }),
    };
    out.write_json(&format!("{prefix}eigenvalues.json"), &report)?;
    out.write(&format!("{prefix}element_histogram.csv"), |w| elements.write_csv(w))?;
    out.write(&format!("{prefix}mp_overlay.csv"), |w| mp.write_overlay_csv(w))?;
    out.write(&format!("{prefix}eigvec_components.csv"), |w| {
        write_leading_components(w, dec)
    })?;

    let comp = component_histogram(dec, Components::All, component_bins(dec, args.bins)?)?;
    let fit = GaussianFit::from_histogram(&comp);
    let gauss = |x: f64| fit.density(x);
    out.write(&format!("{prefix}component_histogram.csv"), |w| {
        comp.write_csv_with(w, &[("gaussian_fit", &gauss)])
    })
}

/// Per-series components of the two leading eigenvectors.
fn write_leading_components(w: &mut dyn std::io::Write, dec: &SpectralDecomposition) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["series", "v_max", "v_max_minus_1"]).map_err(ser)?;
    let n = dec.n();
    for (i, label) in dec.labels.iter().enumerate() {
        csv.write_record([
            label.clone(),
            format_f64(dec.eigenvectors[(i, n - 1)]),
            format_f64(dec.eigenvectors[(i, n - 2)]),
        ])
        .map_err(ser)?;
    }
    csv.flush().map_err(|e| Error::Serialize(e.to_string()))
}
