//! Reading and writing sample matrices.
//!
//! Two formats. CSV is the interchange format: an optional one-line header,
//! one sample per line, and an optional trailing `label` column holding 0/1;
//! values are written with the shortest representation that round-trips, so a
//! save/load cycle is exact. The binary format is for large runs: magic
//! `MFAC`, little-endian u32 row and column counts, a label-presence byte,
//! row-major f64 payload, then one byte per label when present.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::SampleMatrix;

const MAGIC: &[u8; 4] = b"MFAC";

/// On-disk representation, chosen by file extension in the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    /// `.csv` means CSV, everything else the binary format.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

pub fn save_samples(path: &Path, s: &SampleMatrix, format: Format) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => save_csv(&mut w, s),
        Format::Binary => save_binary(&mut w, s),
    }
    .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_samples(path: &Path, format: Format) -> Result<SampleMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut r = BufReader::new(file);
    match format {
        Format::Csv => load_csv(&mut r),
        Format::Binary => {
            load_binary(&mut r).map_err(|e| Error::io(path.display().to_string(), e))?
        }
    }
}

fn save_csv(w: &mut impl Write, s: &SampleMatrix) -> std::io::Result<()> {
    let n = s.dim();
    for j in 0..n {
        if j > 0 {
            write!(w, ",")?;
        }
        write!(w, "x{}", j + 1)?;
    }
    if s.labels().is_some() {
        write!(w, ",label")?;
    }
    writeln!(w)?;
    for (i, row) in s.data().outer_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
        }
        if let Some(l) = s.labels() {
            write!(w, ",{}", l[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn load_csv(r: &mut impl BufRead) -> Result<SampleMatrix> {
    let mut lines = r.lines().enumerate();
    let (first_idx, first) = match lines.next() {
        None => return Err(Error::NoSamples),
        Some((i, l)) => (i, l.map_err(|e| Error::Parse {
            row: i,
            msg: e.to_string(),
        })?),
    };
    let first_fields: Vec<&str> = first.trim().split(',').collect();
    let header_labels = first_fields
        .last()
        .map(|f| f.trim().eq_ignore_ascii_case("label"))
        .unwrap_or(false);
    let is_header =
        header_labels || first_fields.iter().any(|f| f.trim().parse::<f64>().is_err());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    let mut parse_line = |idx: usize, line: &str| -> Result<()> {
        let line = line.trim();
        if line.is_empty() {
            return Ok(());
        }
        let fields: Vec<&str> = line.split(',').collect();
        let value_count = if header_labels {
            fields.len().saturating_sub(1)
        } else {
            fields.len()
        };
        let mut row = Vec::with_capacity(value_count);
        for f in &fields[..value_count] {
            let v: f64 = f.trim().parse().map_err(|_| Error::Parse {
                row: idx,
                msg: format!("bad number {f:?}"),
            })?;
            row.push(v);
        }
        if header_labels {
            let f = fields[fields.len() - 1].trim();
            let l: u8 = f.parse().map_err(|_| Error::Parse {
                row: idx,
                msg: format!("bad label {f:?}"),
            })?;
            labels.push(l);
        }
        if let Some(prev) = rows.first() {
            if row.len() != prev.len() {
                return Err(Error::Parse {
                    row: idx,
                    msg: format!("{} columns, expected {}", row.len(), prev.len()),
                });
            }
        }
        rows.push(row);
        Ok(())
    };
    if !is_header {
        parse_line(first_idx, &first)?;
    }
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::Parse {
            row: idx,
            msg: e.to_string(),
        })?;
        parse_line(idx, &line)?;
    }
    if rows.is_empty() {
        return Err(Error::NoSamples);
    }
    let n = rows[0].len();
    let data = Array2::from_shape_fn((rows.len(), n), |(i, j)| rows[i][j]);
    SampleMatrix::new(data, if header_labels { Some(labels) } else { None })
}

fn save_binary(w: &mut impl Write, s: &SampleMatrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(&(s.dim() as u32).to_le_bytes())?;
    w.write_all(&[u8::from(s.labels().is_some())])?;
    for v in s.data().iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    if let Some(l) = s.labels() {
        w.write_all(l)?;
    }
    Ok(())
}

fn load_binary(r: &mut impl Read) -> std::io::Result<Result<SampleMatrix>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Ok(Err(Error::Data(format!(
            "bad magic {:02x?}, not a sample file",
            magic
        ))));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let rows = u32::from_le_bytes(buf4) as usize;
    r.read_exact(&mut buf4)?;
    let cols = u32::from_le_bytes(buf4) as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let mut data = Array2::zeros((rows, cols));
    let mut buf8 = [0u8; 8];
    for i in 0..rows {
        for j in 0..cols {
            r.read_exact(&mut buf8)?;
            data[[i, j]] = f64::from_le_bytes(buf8);
        }
    }
    let labels = if flag[0] != 0 {
        let mut l = vec![0u8; rows];
        r.read_exact(&mut l)?;
        Some(l)
    } else {
        None
    };
    Ok(SampleMatrix::new(data, labels))
}
