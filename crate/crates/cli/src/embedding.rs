//! Embedding tables on disk.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size    | content                     |
//! |--------|---------|-----------------------------|
//! | 0      | 4       | magic `CFMB`                |
//! | 4      | 4       | version, `u32`, currently 1 |
//! | 8      | 4       | rows `n`, `u32`             |
//! | 12     | 4       | columns `d`, `u32`          |
//! | 16     | `4·n·d` | `f32` values, row-major     |
//!
//! The text alternative is UTF-8 CSV with a header `f0,f1,...` and one row
//! per sample. Readers detect the format from the magic bytes.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{CliError, Result};

pub const MAGIC: [u8; 4] = *b"CFMB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Binary,
    Csv,
}

impl FileFormat {
    /// `.csv` means CSV, anything else binary.
    pub fn from_extension(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FileFormat::Csv,
            _ => FileFormat::Binary,
        }
    }
}

/// `n × d` table of finite values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl Embedding {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(CliError::Embedding("zero columns".into()));
        }
        if values.len() != n * d {
            return Err(CliError::Embedding(format!(
                "{} values for a {n}x{d} table",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CliError::Embedding(format!(
                "non-finite value at row {}, column {}",
                i / d,
                i % d
            )));
        }
        Ok(Self { n, d, values })
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.nrows(), m.ncols(), m.transpose().as_slice().to_vec())
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.d, &self.values)
    }
}

fn format_error(path: &Path, offset: usize, what: impl Into<String>) -> CliError {
    CliError::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        what: what.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

/// Decodes a binary embedding; `path` only labels errors.
pub fn decode_binary(bytes: &[u8], path: &Path) -> Result<Embedding> {
    if bytes.len() < HEADER_LEN {
        return Err(format_error(
            path,
            bytes.len(),
            format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len()),
        ));
    }
    if bytes[..4] != MAGIC {
        return Err(format_error(path, 0, "bad magic, expected CFMB"));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(format_error(path, 4, format!("unsupported version {version}")));
    }
    let n = read_u32(bytes, 8) as usize;
    let d = read_u32(bytes, 12) as usize;
    if d == 0 {
        return Err(format_error(path, 12, "zero columns"));
    }
    let payload = (n as u64) * (d as u64) * 4;
    let actual = (bytes.len() - HEADER_LEN) as u64;
    if actual != payload {
        let offset = HEADER_LEN as u64 + actual.min(payload);
        return Err(CliError::Format {
            path: path.to_path_buf(),
            offset,
            what: format!("payload is {actual} bytes, header implies {payload}"),
        });
    }
    let mut values = Vec::with_capacity(n * d);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(format_error(
                path,
                HEADER_LEN + 4 * i,
                format!("non-finite value at row {}, column {}", i / d, i % d),
            ));
        }
        values.push(f64::from(v));
    }
    Embedding::new(n, d, values)
}

/// Values are narrowed to `f32`; anything that overflows is rejected.
pub fn encode_binary(emb: &Embedding) -> Result<Vec<u8>> {
    let n = u32::try_from(emb.n).map_err(|_| CliError::Embedding("too many rows".into()))?;
    let d = u32::try_from(emb.d).map_err(|_| CliError::Embedding("too many columns".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * emb.values.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    for (i, &v) in emb.values.iter().enumerate() {
        let narrow = v as f32;
        if !narrow.is_finite() {
            return Err(CliError::Embedding(format!(
                "value {v:e} at row {}, column {} overflows f32",
                i / emb.d,
                i % emb.d
            )));
        }
        out.extend_from_slice(&narrow.to_le_bytes());
    }
    Ok(out)
}

fn csv_error(path: &Path, pos: Option<&csv::Position>, what: impl Into<String>) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        line: pos.map_or(0, |p| p.line()),
        what: what.into(),
    }
}

pub fn decode_csv(bytes: &[u8], path: &Path) -> Result<Embedding> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| csv_error(path, e.position(), e.to_string()))?
        .clone();
    let d = header.len();
    if d == 0 || header.iter().any(str::is_empty) {
        return Err(CliError::Csv {
            path: path.to_path_buf(),
            line: 1,
            what: "missing header row".into(),
        });
    }
    for (j, name) in header.iter().enumerate() {
        if name != format!("f{j}") {
            return Err(CliError::Csv {
                path: path.to_path_buf(),
                line: 1,
                what: format!("header column {j} is {name:?}, expected \"f{j}\""),
            });
        }
    }

    let mut values = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e.position(), e.to_string()))?;
        let pos = record.position();
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| csv_error(path, pos, format!("column {j}: {field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(csv_error(path, pos, format!("column {j}: non-finite value")));
            }
            values.push(v);
        }
        n += 1;
    }
    Embedding::new(n, d, values)
}

pub fn encode_csv(emb: &Embedding) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..emb.d).map(|j| format!("f{j}")).collect();
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
        w.write_record(&rec).map_err(|e| CliError::Embedding(e.to_string()))
    };
    write(&mut writer, header)?;
    for row in emb.values.chunks(emb.d) {
        write(&mut writer, row.iter().map(|v| v.to_string()).collect())?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::Embedding(e.to_string()))
}

pub fn detect(bytes: &[u8]) -> FileFormat {
    if bytes.starts_with(&MAGIC) {
        FileFormat::Binary
    } else {
        FileFormat::Csv
    }
}

pub fn read(path: &Path) -> Result<Embedding> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    match detect(&bytes) {
        FileFormat::Binary => decode_binary(&bytes, path),
        FileFormat::Csv => decode_csv(&bytes, path),
    }
}

pub fn encode(emb: &Embedding, format: FileFormat) -> Result<Vec<u8>> {
    match format {
        FileFormat::Binary => encode_binary(emb),
        FileFormat::Csv => encode_csv(emb),
    }
}
