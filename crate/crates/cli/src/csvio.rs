//! CSV ingestion and emission for quotes, evaluation grids and prices.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use chebrb_core::calibration::{Quote, QuoteSet};

/// Evaluation targets declared by a grid CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Per-dimension value lists (`dim,values...` rows).
    Product(Vec<Vec<f64>>),
    /// Explicit point rows.
    Points(Vec<Vec<f64>>),
}

/// Reads quotes with the header `spot,strike,maturity_days,rate_annual,price`.
pub fn read_quotes(path: &Path) -> Result<QuoteSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let want = ["spot", "strike", "maturity_days", "rate_annual", "price"];
    let cols: Vec<usize> = want
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .with_context(|| format!("quotes CSV is missing column '{name}'"))
        })
        .collect::<Result<_>>()?;
    let mut quotes = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is line 1
        let record = record.with_context(|| format!("row {row}: malformed CSV"))?;
        let field = |c: usize| -> Result<f64> {
            let raw = record
                .get(cols[c])
                .with_context(|| format!("row {row}: missing field '{}'", want[c]))?;
            raw.parse::<f64>()
                .with_context(|| format!("row {row}: cannot parse '{raw}' as {}", want[c]))
        };
        quotes.push(Quote {
            spot: field(0)?,
            strike: field(1)?,
            maturity_days: field(2)?,
            rate_annual: field(3)?,
            price: field(4)?,
        });
    }
    if quotes.is_empty() {
        bail!("quotes CSV {} contains no data rows", path.display());
    }
    Ok(QuoteSet::new(quotes)?)
}

/// Reads an evaluation grid: either product form, where each row is
/// `dim_index, v1, v2, ..` and every dimension appears exactly once, or
/// plain point rows with one coordinate per column.
pub fn read_grid(path: &Path, dims: usize) -> Result<GridSpec> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .context("reading grid CSV")?;
    if records.is_empty() {
        bail!("grid CSV {} is empty", path.display());
    }
    let first_cell = records[0].get(0).unwrap_or("");
    if first_cell.eq_ignore_ascii_case("dim") {
        let mut axes: Vec<Option<Vec<f64>>> = vec![None; dims];
        for (i, record) in records.iter().enumerate().skip(1) {
            let row = i + 1;
            let d: usize = record
                .get(0)
                .with_context(|| format!("row {row}: missing dim index"))?
                .parse()
                .with_context(|| format!("row {row}: bad dim index"))?;
            if d >= dims {
                bail!("row {row}: dim index {d} out of range for {dims} dimensions");
            }
            if axes[d].is_some() {
                bail!("row {row}: dimension {d} listed twice");
            }
            let vals: Vec<f64> = record
                .iter()
                .skip(1)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .with_context(|| format!("row {row}: cannot parse '{s}'"))
                })
                .collect::<Result<_>>()?;
            if vals.is_empty() {
                bail!("row {row}: dimension {d} has no values");
            }
            axes[d] = Some(vals);
        }
        let axes: Vec<Vec<f64>> = axes
            .into_iter()
            .enumerate()
            .map(|(d, a)| a.with_context(|| format!("grid CSV does not cover dimension {d}")))
            .collect::<Result<_>>()?;
        return Ok(GridSpec::Product(axes));
    }
    // point rows, with an optional non-numeric header
    let mut points = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let row = i + 1;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|s| s.parse::<f64>()).collect();
        match parsed {
            Ok(pt) => {
                if pt.len() != dims {
                    bail!(
                        "row {row}: point has {} coordinates, expected {dims}",
                        pt.len()
                    );
                }
                points.push(pt);
            }
            Err(_) if i == 0 => continue, // header row
            Err(e) => bail!("row {row}: cannot parse point ({e})"),
        }
    }
    if points.is_empty() {
        bail!("grid CSV {} declares no points", path.display());
    }
    Ok(GridSpec::Points(points))
}

/// Writes one `x1,..,xn,price` row per evaluation point.
pub fn write_prices(path: &Path, dims: usize, rows: &[(Vec<f64>, f64)]) -> Result<()> {
    let mut out = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let header: Vec<String> = (1..=dims).map(|d| format!("x{d}")).collect();
    writeln!(out, "{},price", header.join(","))?;
    for (point, price) in rows {
        let coords: Vec<String> = point.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{price}", coords.join(","))?;
    }
    Ok(())
}
