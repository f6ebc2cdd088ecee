//! Sample-file ingestion.
//!
//! Two formats are accepted, told apart by the first four bytes:
//!
//! * binary: magic `LPBK`, then little-endian `u32` dim, `u32` N for axis 0
//!   and `u32` N for axis 1 (0 in 1D), then `N^dim` row-major pairs of
//!   little-endian `f64` (re, im);
//! * CSV: one row per grid point, `i,re,im` in 1D or `i0,i1,re,im` in 2D,
//!   with an optional header row. Every point must appear exactly once.

use std::path::Path;

use lpbk::spectral::{GridSpec, SampledField};
use lpbk::Complex64;

use crate::JobError;

pub const MAGIC: &[u8; 4] = b"LPBK";
pub const HEADER_LEN: usize = 16;

fn bad(path: &Path, msg: impl std::fmt::Display) -> JobError {
    JobError::Input(format!("{}: {msg}", path.display()))
}

/// Reads a sample file on `grid`.
pub fn read_sample(path: &Path, grid: &GridSpec) -> Result<SampledField, JobError> {
    let bytes = std::fs::read(path).map_err(|e| bad(path, e))?;
    let values = if bytes.starts_with(MAGIC) {
        decode_binary(&bytes, grid).map_err(|m| bad(path, m))?
    } else {
        decode_csv(&bytes, grid).map_err(|m| bad(path, m))?
    };
    SampledField::new(*grid, values).map_err(|e| bad(path, e))
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("eight bytes"))
}

pub fn decode_binary(bytes: &[u8], grid: &GridSpec) -> Result<Vec<Complex64>, String> {
    if bytes.len() < HEADER_LEN {
        return Err("truncated header".into());
    }
    let dim = u32_at(bytes, 4) as usize;
    let n0 = u32_at(bytes, 8) as usize;
    let n1 = u32_at(bytes, 12) as usize;
    let n = grid.points_per_axis();
    let expected_n1 = if grid.dim() == 2 { n } else { 0 };
    if dim != grid.dim() || n0 != n || n1 != expected_n1 {
        return Err(format!(
            "header describes dim {dim}, sizes ({n0}, {n1}); job grid is dim {}, N = {n}",
            grid.dim()
        ));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != grid.len() * 16 {
        return Err(format!(
            "expected {} bytes of samples, found {}",
            grid.len() * 16,
            body.len()
        ));
    }
    Ok((0..grid.len())
        .map(|i| Complex64::new(f64_at(body, 16 * i), f64_at(body, 16 * i + 8)))
        .collect())
}

pub fn encode_binary(field: &SampledField) -> Vec<u8> {
    let grid = field.grid();
    let n = grid.points_per_axis() as u32;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&(if grid.dim() == 2 { n } else { 0 }).to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_csv(bytes: &[u8], grid: &GridSpec) -> Result<Vec<Complex64>, String> {
    let dim = grid.dim();
    let n = grid.points_per_axis();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut values: Vec<Option<Complex64>> = vec![None; grid.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = row + 1;
        if record.len() != dim + 2 {
            return Err(format!(
                "line {line}: expected {} columns, found {}",
                dim + 2,
                record.len()
            ));
        }
        let mut idx = [0usize; 2];
        let mut header = false;
        for (a, slot) in idx.iter_mut().take(dim).enumerate() {
            match record[a].parse::<usize>() {
                Ok(i) if i < n => *slot = i,
                Ok(i) => return Err(format!("line {line}: index {i} outside 0..{n}")),
                Err(_) if row == 0 => header = true,
                Err(_) => return Err(format!("line {line}: `{}` is not an index", &record[a])),
            }
        }
        if header {
            continue;
        }
        let number = |c: usize| {
            record[c]
                .parse::<f64>()
                .map_err(|_| format!("line {line}: `{}` is not a number", &record[c]))
        };
        let v = Complex64::new(number(dim)?, number(dim + 1)?);
        let flat = grid.flatten(idx);
        if values[flat].replace(v).is_some() {
            return Err(format!("line {line}: point {:?} given twice", &idx[..dim]));
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(format!("{missing} grid points have no value"));
    }
    Ok(values.into_iter().map(|v| v.expect("checked")).collect())
}
