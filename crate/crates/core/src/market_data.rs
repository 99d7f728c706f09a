//! Daily price tables: loading, validation, alignment and canonical CSV output.
//!
//! A [`PriceTable`] holds one row per calendar day and one column per asset,
//! every price quoted in a single quote currency. Cells may be missing (an
//! asset not yet listed, a gap in the source); [`align_and_filter`] is the only
//! way to obtain a complete table and it never invents values.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numfmt::format_f64;

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// CSV dialect of a price or capitalization file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableFormat {
    pub delimiter: u8,
}

impl Default for TableFormat {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

/// Aligned daily prices for a basket of assets.
///
/// `prices[(t, i)]` is the price of asset `i` on `dates[t]`, in units of
/// `quote` per unit of the asset. Missing cells are stored as NaN and are
/// only visible through [`PriceTable::price`] returning `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    quote: String,
    prices: DMatrix<f64>,
    caps: Option<DMatrix<f64>>,
}

impl PriceTable {
    /// Builds a table, checking every structural invariant. Missing cells must
    /// be NaN; any other non-finite or non-positive price is rejected.
    pub fn new(
        dates: Vec<NaiveDate>,
        assets: Vec<String>,
        quote: impl Into<String>,
        prices: DMatrix<f64>,
    ) -> Result<Self> {
        let quote = quote.into();
        if dates.len() < 2 {
            return Err(Error::InvalidTable(format!(
                "at least 2 dates required, got {}",
                dates.len()
            )));
        }
        if assets.len() < 2 {
            return Err(Error::InvalidTable(format!(
                "at least 2 assets required, got {}",
                assets.len()
            )));
        }
        if prices.nrows() != dates.len() || prices.ncols() != assets.len() {
            return Err(Error::InvalidTable(format!(
                "price matrix is {}x{}, expected {}x{}",
                prices.nrows(),
                prices.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTable(format!(
                "dates not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let mut seen = HashSet::new();
        for a in &assets {
            if !seen.insert(a.as_str()) {
                return Err(Error::InvalidTable(format!("duplicate asset {a:?}")));
            }
        }
        if seen.contains(quote.as_str()) {
            return Err(Error::InvalidTable(format!(
                "quote currency {quote:?} is also listed as an asset"
            )));
        }
        for i in 0..assets.len() {
            for t in 0..dates.len() {
                let p = prices[(t, i)];
                if !p.is_nan() && !(p.is_finite() && p > 0.0) {
                    return Err(Error::InvalidTable(format!(
                        "price of {} on {} is {p}, must be finite and > 0",
                        assets[i], dates[t]
                    )));
                }
            }
        }
        Ok(Self {
            dates,
            assets,
            quote,
            prices,
            caps: None,
        })
    }

    /// Attaches a capitalization matrix of the same shape. Missing cells (NaN)
    /// are allowed and count as zero capitalization in share reports.
    pub fn with_caps(mut self, caps: DMatrix<f64>) -> Result<Self> {
        if caps.shape() != self.prices.shape() {
            return Err(Error::CapsMismatch(format!(
                "shape {:?} differs from prices {:?}",
                caps.shape(),
                self.prices.shape()
            )));
        }
        if let Some(bad) = caps.iter().find(|c| !c.is_nan() && !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::CapsMismatch(format!(
                "capitalization {bad} is negative or not finite"
            )));
        }
        self.caps = Some(caps);
        Ok(self)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn quote(&self) -> &str {
        &self.quote
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// Raw price matrix (dates x assets); NaN marks a missing cell.
    pub fn prices(&self) -> &DMatrix<f64> {
        &self.prices
    }

    pub fn caps(&self) -> Option<&DMatrix<f64>> {
        self.caps.as_ref()
    }

    pub fn price(&self, t: usize, asset: usize) -> Option<f64> {
        let p = self.prices[(t, asset)];
        (!p.is_nan()).then_some(p)
    }

    pub fn asset_index(&self, ticker: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == ticker)
    }

    pub fn is_complete(&self) -> bool {
        !self.prices.iter().any(|p| p.is_nan())
    }

    /// (asset, date) pairs of every missing cell, asset-major.
    pub fn gaps(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, asset) in self.assets.iter().enumerate() {
            for (t, date) in self.dates.iter().enumerate() {
                if self.prices[(t, i)].is_nan() {
                    out.push((asset.clone(), date.to_string()));
                }
            }
        }
        out
    }

    /// Rows `start..end` as a new table (caps sliced alongside).
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n_dates() {
            return Err(Error::InvalidTable(format!(
                "row range {start}..{end} outside 0..{}",
                self.n_dates()
            )));
        }
        let rows = end - start;
        let mut table = Self::new(
            self.dates[start..end].to_vec(),
            self.assets.clone(),
            self.quote.clone(),
            self.prices.rows(start, rows).into_owned(),
        )?;
        if let Some(caps) = &self.caps {
            table = table.with_caps(caps.rows(start, rows).into_owned())?;
        }
        Ok(table)
    }

    /// Same table with every price of one asset multiplied by `factor`.
    pub fn scale_asset(&self, asset: usize, factor: f64) -> Result<Self> {
        let mut prices = self.prices.clone();
        prices.column_mut(asset).scale_mut(factor);
        let mut table = Self::new(self.dates.clone(), self.assets.clone(), self.quote.clone(), prices)?;
        table.caps = self.caps.clone();
        Ok(table)
    }

    fn select_assets(&self, keep: &[usize]) -> Result<Self> {
        let prices = self.prices.select_columns(keep);
        let mut table = Self::new(
            self.dates.clone(),
            keep.iter().map(|&i| self.assets[i].clone()).collect(),
            self.quote.clone(),
            prices,
        )?;
        if let Some(caps) = &self.caps {
            table = table.with_caps(caps.select_columns(keep))?;
        }
        Ok(table)
    }

    /// Writes the canonical price CSV: `date,<ticker>,...`, dates ascending,
    /// assets in table order, missing cells empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(out, &self.dates, &self.assets, &self.prices)
    }

    pub fn write_caps_csv<W: Write>(&self, out: W) -> Result<()> {
        let caps = self.caps.as_ref().ok_or(Error::MissingCaps)?;
        write_matrix_csv(out, &self.dates, &self.assets, caps)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn write_matrix_csv<W: Write>(out: W, dates: &[NaiveDate], assets: &[String], values: &DMatrix<f64>) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    let mut w = csv::WriterBuilder::new().from_writer(out);
    let mut header = Vec::with_capacity(assets.len() + 1);
    header.push("date".to_string());
    header.extend(assets.iter().cloned());
    w.write_record(&header).map_err(ser)?;
    for (t, date) in dates.iter().enumerate() {
        let mut rec = Vec::with_capacity(assets.len() + 1);
        rec.push(date.format(DATE_FORMAT).to_string());
        for i in 0..assets.len() {
            let v = values[(t, i)];
            rec.push(if v.is_nan() { String::new() } else { format_f64(v) });
        }
        w.write_record(&rec).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(())
}

/// A parsed CSV grid before date sorting and validation.
struct RawGrid {
    assets: Vec<String>,
    /// (file row, date, values)
    rows: Vec<(usize, NaiveDate, Vec<f64>)>,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

fn read_grid<R: Read>(
    reader: R,
    name: &str,
    format: TableFormat,
    check: impl Fn(usize, usize, &str, f64) -> Result<()>,
) -> Result<RawGrid> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: name.to_string(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() < 2 {
        return Err(Error::InvalidTable(format!(
            "{name}: header must name a date column and at least one asset"
        )));
    }
    let assets: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut seen = HashSet::new();
    for (k, a) in assets.iter().enumerate() {
        if a.is_empty() || !seen.insert(a.as_str()) {
            return Err(Error::DuplicateAsset {
                path: name.to_string(),
                column: k + 2,
                asset: a.clone(),
            });
        }
    }

    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = k + 2;
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                path: name.to_string(),
                row,
                expected: header.len(),
                found: rec.len(),
            });
        }
        let date = NaiveDate::parse_from_str(&rec[0], DATE_FORMAT).map_err(|_| Error::UnparseableCell {
            path: name.to_string(),
            row,
            column: 1,
            value: rec[0].to_string(),
            expected: "an ISO-8601 date (YYYY-MM-DD)",
        })?;
        let mut values = Vec::with_capacity(assets.len());
        for (i, cell) in rec.iter().skip(1).enumerate() {
            let column = i + 2;
            if is_missing(cell) {
                values.push(f64::NAN);
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::UnparseableCell {
                    path: name.to_string(),
                    row,
                    column,
                    value: cell.to_string(),
                    expected: "a finite decimal number",
                })?;
            check(row, column, &assets[i], v)?;
            values.push(v);
        }
        rows.push((row, date, values));
    }

    rows.sort_by_key(|(_, date, _)| *date);
    if let Some(w) = rows.windows(2).find(|w| w[0].1 == w[1].1) {
        let dup = w[0].0.max(w[1].0);
        return Err(Error::DuplicateDate {
            path: name.to_string(),
            row: dup,
            date: w[1].1.to_string(),
        });
    }
    Ok(RawGrid { assets, rows })
}

fn grid_matrix(grid: &RawGrid) -> DMatrix<f64> {
    DMatrix::from_fn(grid.rows.len(), grid.assets.len(), |t, i| grid.rows[t].2[i])
}

/// Parses a price CSV from any reader. `name` is used in error messages.
pub fn read_price_table<R: Read>(reader: R, name: &str, format: TableFormat, quote: &str) -> Result<PriceTable> {
    let grid = read_grid(reader, name, format, |row, column, asset, v| {
        if v > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositivePrice {
                path: name.to_string(),
                row,
                column,
                asset: asset.to_string(),
                value: v,
            })
        }
    })?;
    let prices = grid_matrix(&grid);
    let dates = grid.rows.iter().map(|r| r.1).collect();
    PriceTable::new(dates, grid.assets, quote, prices)
}

/// Loads a price table from a CSV file with header `date,<ticker>,...`.
/// Rows are sorted by date; empty or `NA` cells are recorded as missing.
pub fn load_price_table(path: &Path, format: TableFormat, quote: &str) -> Result<PriceTable> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_price_table(file, &path.display().to_string(), format, quote)
}

/// Parses a capitalization CSV and attaches it to `table`. The file must have
/// the same assets in the same order and the same set of dates.
pub fn read_caps<R: Read>(reader: R, name: &str, format: TableFormat, table: PriceTable) -> Result<PriceTable> {
    let grid = read_grid(reader, name, format, |row, column, asset, v| {
        if v >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidCapitalization {
                path: name.to_string(),
                row,
                column,
                asset: asset.to_string(),
                value: v,
            })
        }
    })?;
    if grid.assets != table.assets {
        return Err(Error::CapsMismatch(format!(
            "{name}: asset columns differ from the price table"
        )));
    }
    let dates: Vec<NaiveDate> = grid.rows.iter().map(|r| r.1).collect();
    if dates != table.dates {
        return Err(Error::CapsMismatch(format!(
            "{name}: dates differ from the price table"
        )));
    }
    let caps = grid_matrix(&grid);
    table.with_caps(caps)
}

pub fn load_caps(path: &Path, format: TableFormat, table: PriceTable) -> Result<PriceTable> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_caps(file, &path.display().to_string(), format, table)
}

/// How to treat missing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    /// Any gap is an error.
    RejectIncomplete,
    /// Assets with any gap are removed.
    DropIncompleteAssets,
}

/// Result of [`align_and_filter`].
#[derive(Debug, Clone)]
pub struct AlignReport {
    pub table: PriceTable,
    /// Assets removed under [`MissingPolicy::DropIncompleteAssets`], in table order.
    pub removed: Vec<String>,
}

/// Produces a complete table by rejection or by removing incomplete assets.
pub fn align_and_filter(table: &PriceTable, policy: MissingPolicy) -> Result<AlignReport> {
    if table.is_complete() {
        return Ok(AlignReport {
            table: table.clone(),
            removed: Vec::new(),
        });
    }
    match policy {
        MissingPolicy::RejectIncomplete => Err(Error::IncompleteSeries(table.gaps())),
        MissingPolicy::DropIncompleteAssets => {
            let (keep, drop): (Vec<usize>, Vec<usize>) =
                (0..table.n_assets()).partition(|&i| !table.prices.column(i).iter().any(|p| p.is_nan()));
            if keep.len() < 2 {
                return Err(Error::InvalidTable(format!(
                    "only {} complete asset(s) remain after dropping incomplete ones",
                    keep.len()
                )));
            }
            Ok(AlignReport {
                table: table.select_assets(&keep)?,
                removed: drop.iter().map(|&i| table.assets[i].clone()).collect(),
            })
        }
    }
}
