use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ksd::io::format_f64;
use ksd::{Error, Sample};
use serde::Serialize;

use crate::CliError;

/// Parses a spec given inline (compact or JSON) or as a path to a JSON file.
pub fn load_spec<T>(arg: &str) -> Result<T, CliError>
where
    T: FromStr<Err = Error>,
{
    let path = Path::new(arg);
    if !arg.trim_start().starts_with('{') && path.is_file() {
        let text = fs::read_to_string(path).map_err(Error::from)?;
        return Ok(text.parse()?);
    }
    Ok(arg.parse()?)
}

pub fn read_sample(path: &Path, weighted: bool) -> Result<Sample, CliError> {
    let sample = if path == Path::new("-") {
        ksd::io::read_sample(io::stdin().lock(), weighted)?
    } else {
        let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        ksd::io::read_sample(file, weighted)?
    };
    Ok(sample)
}

/// Writer for `--out`, falling back to stdout.
pub fn output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Error::from)?;
            }
            Box::new(BufWriter::new(
                File::create(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from)?;
    writeln!(w).map_err(Error::from)?;
    w.flush().map_err(Error::from)?;
    Ok(())
}

/// Plain CSV table with a header; floats use 17 significant digits.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Num(v) => format_f64(v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
                    Cell::Text(s) => s,
                })
                .collect(),
        );
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.write_to(BufWriter::new(file)).map_err(Error::from)?;
        Ok(())
    }
}

/// Creates the experiment output directory.
pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}
