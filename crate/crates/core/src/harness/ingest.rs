//! Price files: one value per row, `.` as decimal separator, with an
//! optional single header row (a first row that does not parse as a number).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::Series;

/// Raw values of a one-column file, header skipped.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut first = true;
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(Error::Data {
                    row,
                    message: format!("non-finite value {v}"),
                })
            }
            Err(_) if first => {}
            Err(_) => {
                return Err(Error::Data {
                    row,
                    message: format!("cannot parse '{field}' as a number"),
                })
            }
        }
        first = false;
    }
    Ok(values)
}

/// Drops every price equal to its predecessor and returns the log-returns
/// of what remains.
pub fn log_returns(text: &str) -> Result<Series> {
    let prices = parse_values(text)?;
    let mut kept: Vec<f64> = Vec::with_capacity(prices.len());
    let mut row_of_value = text
        .lines()
        .enumerate()
        .filter(|(_, l)| l.trim().parse::<f64>().is_ok())
        .map(|(i, _)| i + 1);
    for &p in &prices {
        let row = row_of_value.next().unwrap_or(0);
        if p <= 0.0 {
            return Err(Error::Data {
                row,
                message: format!("non-positive price {p}"),
            });
        }
        if kept.last() != Some(&p) {
            kept.push(p);
        }
    }
    if kept.len() < 2 {
        return Err(Error::Data {
            row: 0,
            message: format!(
                "need at least 2 distinct successive prices, found {}",
                kept.len()
            ),
        });
    }
    Series::new(kept.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

pub fn ingest_prices(path: impl AsRef<Path>) -> Result<Series> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    log_returns(&text)
}

/// One value per row, no transformation.
pub fn read_series(path: impl AsRef<Path>) -> Result<Series> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Series::new(parse_values(&text)?)
}
