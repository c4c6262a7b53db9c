//! Dataset files.
//!
//! * dense binary: `b"VRPD"`, version `u32`, `d u32`, `n u32`, then `d·n`
//!   little-endian `f64` values in column-major order;
//! * sparse text: header `#d=<d> n=<n>`, then one line per column of
//!   space-separated `index:value` tokens with 0-based indices (a blank line
//!   is a zero column);
//! * dense text: CSV with one column of `X` per row; lines starting with `#`
//!   are comments.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

pub const DENSE_MAGIC: &[u8; 4] = b"VRPD";
pub const DENSE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    DenseBinary,
    SparseText,
    DenseText,
}

impl DataFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "vrpd" | "bin" => Some(DataFormat::DenseBinary),
            "svm" | "libsvm" | "txt" | "sparse" => Some(DataFormat::SparseText),
            "csv" => Some(DataFormat::DenseText),
            _ => None,
        }
    }
}

pub fn write_dense_binary<W: Write>(x: &DataMatrix, mut out: W) -> Result<()> {
    let d = u32::try_from(x.dim()).map_err(|_| Error::domain("d exceeds u32"))?;
    let n = u32::try_from(x.count()).map_err(|_| Error::domain("n exceeds u32"))?;
    out.write_all(DENSE_MAGIC)?;
    out.write_all(&DENSE_VERSION.to_le_bytes())?;
    out.write_all(&d.to_le_bytes())?;
    out.write_all(&n.to_le_bytes())?;
    for v in x.to_dense_vec() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dense_binary<R: Read>(mut input: R) -> Result<DataMatrix> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..4] != DENSE_MAGIC {
        return Err(Error::InvalidData("missing VRPD magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != DENSE_VERSION {
        return Err(Error::InvalidData(format!("unsupported version {version}")));
    }
    let (d, n) = (word(8) as usize, word(12) as usize);
    let len = d
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidData("d·n overflows".into()))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::InvalidData(format!(
            "expected {} payload bytes for {d}x{n}, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DataMatrix::from_dense(d, n, data)
}

pub fn write_sparse_text<W: Write>(x: &DataMatrix, mut out: W) -> Result<()> {
    writeln!(out, "#d={} n={}", x.dim(), x.count())?;
    for col in x.columns() {
        let mut first = true;
        for (j, v) in col.entries().filter(|&(_, v)| v != 0.0) {
            if !first {
                out.write_all(b" ")?;
            }
            write!(out, "{j}:{v}")?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_sparse_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix('#')?;
    let mut d = None;
    let mut n = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            d = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("n=") {
            n = v.parse().ok();
        }
    }
    Some((d?, n?))
}

pub fn read_sparse_text<R: BufRead>(input: R) -> Result<DataMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or(Error::Parse {
            line: 1,
            message: "empty file".into(),
        })??;
    let (d, n) = parse_sparse_header(header.trim()).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("expected header '#d=<d> n=<n>', found {header:?}"),
    })?;
    let mut columns = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        let trimmed = line.trim();
        if columns.len() == n {
            if trimmed.is_empty() {
                continue;
            }
            return Err(Error::Parse {
                line: lineno,
                message: format!("more than n = {n} columns"),
            });
        }
        let mut col = Vec::new();
        for tok in trimmed.split_whitespace() {
            let (j, v) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("token {tok:?} is not index:value"),
            })?;
            let j: usize = j.parse().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad index {j:?}: {e}"),
            })?;
            let v: f64 = v.parse().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad value {v:?}: {e}"),
            })?;
            if j >= d {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("index {j} out of range for d = {d}"),
                });
            }
            col.push((j, v));
        }
        col.sort_by_key(|&(j, _)| j);
        if let Some(w) = col.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("index {} given twice", w[0].0),
            });
        }
        columns.push(col);
    }
    if columns.len() != n {
        return Err(Error::Parse {
            line: columns.len() + 2,
            message: format!("header declares n = {n}, found {} columns", columns.len()),
        });
    }
    DataMatrix::from_sparse_columns(d, &columns)
}

pub fn write_dense_text<W: Write>(x: &DataMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for col in x.columns() {
        let dense = col.to_dense(x.dim());
        w.write_record(dense.iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dense_text<R: Read>(input: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut columns = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        let col = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad value {f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        columns.push(col);
    }
    if columns.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }
    DataMatrix::from_dense_columns(&columns)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Reads a dataset, inferring the format from the extension unless given.
pub fn read_dataset(path: &Path, format: Option<DataFormat>) -> Result<DataMatrix> {
    let format = format
        .or_else(|| DataFormat::from_path(path))
        .ok_or_else(|| Error::domain(format!("cannot infer format of {}", path.display())))?;
    let file = BufReader::new(File::open(path)?);
    match format {
        DataFormat::DenseBinary => read_dense_binary(file),
        DataFormat::SparseText => read_sparse_text(file),
        DataFormat::DenseText => read_dense_text(file),
    }
}

pub fn write_dataset(x: &DataMatrix, path: &Path, format: Option<DataFormat>) -> Result<()> {
    let format = format
        .or_else(|| DataFormat::from_path(path))
        .ok_or_else(|| Error::domain(format!("cannot infer format of {}", path.display())))?;
    let file = BufWriter::new(File::create(path)?);
    match format {
        DataFormat::DenseBinary => write_dense_binary(x, file),
        DataFormat::SparseText => write_sparse_text(x, file),
        DataFormat::DenseText => write_dense_text(x, file),
    }
}
