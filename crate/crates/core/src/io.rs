//! CSV reading and writing for samples.
//!
//! Sample files hold one point per row, comma separated, with an optional
//! header and an optional trailing weight column. Numbers are written with
//! 17 significant digits so that every `f64` survives a round trip.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::stein::Sample;

/// Formats `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses all rows as floats. The first record is treated as a header when
/// any of its fields fails to parse.
pub fn read_numeric_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", line + 1))),
        }
    }
    if let Some(w) = rows.first().map(Vec::len) {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != w) {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {w}",
                i + 1,
                r.len()
            )));
        }
    }
    Ok(rows)
}

/// Reads a sample. With `weighted`, the last column holds (unnormalized)
/// weights; otherwise weights are uniform.
pub fn read_sample<R: Read>(reader: R, weighted: bool) -> Result<Sample> {
    let rows = read_numeric_rows(reader)?;
    if rows.is_empty() {
        return Err(Error::Parse("sample CSV has no data rows".into()));
    }
    let cols = rows[0].len();
    let d = if weighted { cols.saturating_sub(1) } else { cols };
    if d == 0 {
        return Err(Error::Parse("sample CSV needs at least one coordinate column".into()));
    }
    let n = rows.len();
    let mut points = Vec::with_capacity(n * d);
    let mut weights = Vec::with_capacity(n);
    for row in &rows {
        points.extend_from_slice(&row[..d]);
        if weighted {
            weights.push(row[d]);
        }
    }
    let points = Array2::from_shape_vec((n, d), points).expect("shape checked above");
    if weighted {
        Sample::new(points, weights)
    } else {
        Sample::uniform(points)
    }
}

/// Writes a sample with a header `x1,...,xd[,weight]`.
pub fn write_sample<W: Write>(mut writer: W, sample: &Sample, with_weights: bool) -> Result<()> {
    let d = sample.dim();
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    if with_weights {
        header.push("weight".into());
    }
    writeln!(writer, "{}", header.join(","))?;
    for i in 0..sample.len() {
        let mut fields: Vec<String> = sample.point(i).iter().map(|&v| format_f64(v)).collect();
        if with_weights {
            fields.push(format_f64(sample.weights()[i]));
        }
        writeln!(writer, "{}", fields.join(","))?;
    }
    Ok(())
}
