//! On-disk formats for grid functions.
//!
//! Binary container:
//!
//! ```text
//! magic      8 bytes  "ANISOGF1"
//! header_len u32 LE   length of the JSON header in bytes
//! header     JSON     {"dims", "period", "channels", "layout", "scalar"}
//! samples    (re, im) pairs of f64 LE, channel-major then row-major
//! ```
//!
//! CSV export: one row per lattice point and channel with columns
//! `channel, i_0, ..., i_{d-1}, re, im`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridFunction, TorusGrid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"ANISOGF1";
pub const LAYOUT: &str = "row-major";
pub const SCALAR: &str = "f64-complex-pairs-le";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    dims: Vec<usize>,
    period: Vec<f64>,
    channels: usize,
    layout: String,
    scalar: String,
}

pub fn write_binary(f: &GridFunction, mut w: impl Write) -> Result<()> {
    let header = Header {
        dims: f.grid().dims().to_vec(),
        period: f.grid().period().to_vec(),
        channels: f.channels(),
        layout: LAYOUT.into(),
        scalar: SCALAR.into(),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(f.samples().len() * 16);
    for v in f.samples() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<GridFunction> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    if header.layout != LAYOUT || header.scalar != SCALAR {
        return Err(Error::Format(format!(
            "unsupported layout {:?} / scalar {:?}",
            header.layout, header.scalar
        )));
    }
    let grid = TorusGrid::new(&header.dims, &header.period)?;
    let count = grid.len() * header.channels;
    let mut raw = vec![0u8; count * 16];
    r.read_exact(&mut raw)?;
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    let samples = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    GridFunction::new(grid, header.channels, samples)
}

pub fn write_csv(f: &GridFunction, mut w: impl Write) -> Result<()> {
    let grid = f.grid();
    let mut out = String::from("channel");
    for j in 0..grid.ndim() {
        out.push_str(&format!(",i{j}"));
    }
    out.push_str(",re,im\n");
    let n = grid.len();
    for c in 0..f.channels() {
        for i in 0..n {
            out.push_str(&c.to_string());
            for idx in grid.multi_index(i) {
                out.push(',');
                out.push_str(&idx.to_string());
            }
            let v = f.samples()[c * n + i];
            out.push_str(&format!(",{:e},{:e}\n", v.re, v.im));
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
