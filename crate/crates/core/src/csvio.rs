//! Numeric CSV helpers shared by the skeleton and audio exporters.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One CSV record per row; `header` is written first when given.
pub(crate) fn write_rows<T: Scalar>(header: Option<&[String]>, rows: impl Iterator<Item = impl AsRef<[T]>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::format("csv", e.to_string());
    if let Some(h) = header {
        w.write_record(h).map_err(csv_err)?;
    }
    for row in rows {
        w.write_record(row.as_ref().iter().map(|v| v.as_f64().to_string())).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("csv", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::format("csv", e.to_string()))
}

/// Parses rows of exactly `width` numbers; returns `(row_count, data)`.
pub(crate) fn read_rows(context: &'static str, body: &str, width: usize, has_header: bool) -> Result<(usize, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(context, e.to_string()))?;
        let line = rec.position().map_or(rows + 1, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::format(context, format!("line {line} has {} values, expected {width}", rec.len())));
        }
        for cell in rec.iter() {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::format(context, format!("line {line}: bad number {cell:?}")))?;
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::format(context, "no rows"));
    }
    Ok((rows, data))
}
