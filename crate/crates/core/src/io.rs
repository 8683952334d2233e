//! Grid-function files.
//!
//! LPGF layout, all little-endian: magic `b"LPGF"`, `u32` version (= 1),
//! `u32` dimension `n`, `u32` points per axis `N`, `f64` period `L`, then
//! `N^n` interleaved `(re, im)` `f64` pairs in row-major sample order.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Grid, GridFunction};

pub const MAGIC: &[u8; 4] = b"LPGF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

pub fn encode_lpgf(f: &GridFunction) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    for z in f.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_lpgf(bytes: &[u8]) -> Result<GridFunction> {
    let truncated = |offset: usize, what: &str| Error::Format {
        offset,
        message: format!("truncated while reading {what}"),
    };
    if bytes.len() < 4 {
        return Err(truncated(bytes.len(), "magic"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {:?}", &bytes[..4]),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(bytes.len(), "header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim = u32_at(8);
    let points = u32_at(12);
    let length = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if !(1..=2).contains(&dim) {
        return Err(Error::Format {
            offset: 8,
            message: format!("unsupported dimension {dim}"),
        });
    }
    let grid = Grid::new(dim as usize, points as usize, length).map_err(|e| Error::Format {
        offset: 12,
        message: e.to_string(),
    })?;
    let expected = HEADER_LEN + 16 * grid.len();
    if bytes.len() < expected {
        return Err(truncated(bytes.len(), "samples"));
    }
    if bytes.len() > expected {
        return Err(Error::Format {
            offset: expected,
            message: format!("{} trailing bytes", bytes.len() - expected),
        });
    }
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let samples = (0..grid.len())
        .map(|i| {
            let o = HEADER_LEN + 16 * i;
            Complex64::new(f64_at(o), f64_at(o + 8))
        })
        .collect();
    GridFunction::new(grid, samples)
}

pub fn write_lpgf(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_lpgf(f))?;
    Ok(())
}

pub fn read_lpgf(path: impl AsRef<Path>) -> Result<GridFunction> {
    decode_lpgf(&fs::read(path)?)
}

/// One row per sample: coordinates, then real and imaginary parts.
pub fn write_csv<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let grid = f.grid();
    let header = match grid.dim() {
        1 => "x,re,im",
        _ => "x,y,re,im",
    };
    writeln!(out, "{header}")?;
    for (i, z) in f.samples().iter().enumerate() {
        let x = grid.coordinate(i);
        for c in &x[..grid.dim()] {
            write!(out, "{c},")?;
        }
        writeln!(out, "{},{}", z.re, z.im)?;
    }
    Ok(())
}

/// Two-column series `x,y` for plotting.
pub fn write_series_csv<W: Write>(header: (&str, &str), rows: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (x, y) in rows {
        writeln!(out, "{x},{y}")?;
    }
    Ok(())
}
