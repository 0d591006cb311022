//! Binary dump of a solved lattice.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic       4 bytes  "CGRD"
//! version     u32
//! h           f64
//! x_lo x_hi   f64 f64
//! y_lo y_hi   f64 f64
//! nx ny       u64 u64      number of columns and rows
//! fields      u64          number of arrays that follow
//! arrays      fields * nx * ny f64, row-major (row index outer)
//! ```
//!
//! Arrays appear in the order of [`DUMP_FIELDS`]. Unset nodes hold NaN; the
//! `flags` array stores the node flag bits as a float.

use std::io::{Read, Write};

use super::{CharGrid, Rect};
use crate::error::{Error, Result};

pub const DUMP_MAGIC: [u8; 4] = *b"CGRD";
pub const DUMP_VERSION: u32 = 1;
pub const DUMP_FIELDS: [&str; 8] = ["w", "z", "p", "q", "u", "x", "t", "flags"];

#[derive(Clone, Debug, PartialEq)]
pub struct GridDump {
    pub h: f64,
    pub bbox: Rect,
    pub nx: usize,
    pub ny: usize,
    pub fields: Vec<Vec<f64>>,
}

impl GridDump {
    pub fn field(&self, name: &str) -> Option<&[f64]> {
        DUMP_FIELDS
            .iter()
            .position(|f| *f == name)
            .map(|k| self.fields[k].as_slice())
    }

    pub fn at(&self, name: &str, i: usize, j: usize) -> Option<f64> {
        self.field(name).map(|f| f[j * self.nx + i])
    }
}

pub fn write_dump<W: Write>(grid: &CharGrid, mut out: W) -> Result<()> {
    let nx = grid.nx + 1;
    let ny = grid.ny + 1;
    out.write_all(&DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    for v in [grid.h, grid.x_lo, grid.xc(grid.nx), grid.y_lo, grid.yc(grid.ny)] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in [nx as u64, ny as u64, DUMP_FIELDS.len() as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    let mut row = Vec::with_capacity(nx * 8);
    for field in 0..DUMP_FIELDS.len() {
        for j in 0..ny {
            row.clear();
            for i in 0..nx {
                let v = grid.node(i, j).map_or(f64::NAN, |n| {
                    let s = &n.s;
                    [s.w, s.z, s.p, s.q, s.u, s.x, s.t, n.flags as f64][field]
                });
                row.extend_from_slice(&v.to_le_bytes());
            }
            out.write_all(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Dump(format!("truncated header: {e}")))?;
    Ok(buf)
}

pub fn read_dump<R: Read>(mut r: R) -> Result<GridDump> {
    if take::<4, _>(&mut r)? != DUMP_MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != DUMP_VERSION {
        return Err(Error::Dump(format!("unsupported version {version}")));
    }
    let mut f = [0.0; 5];
    for v in f.iter_mut() {
        *v = f64::from_le_bytes(take(&mut r)?);
    }
    let nx = u64::from_le_bytes(take(&mut r)?) as usize;
    let ny = u64::from_le_bytes(take(&mut r)?) as usize;
    let nf = u64::from_le_bytes(take(&mut r)?) as usize;
    let mut fields = Vec::with_capacity(nf);
    let mut buf = vec![0u8; nx * ny * 8];
    for _ in 0..nf {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Dump(format!("truncated data: {e}")))?;
        fields.push(
            buf.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        );
    }
    Ok(GridDump {
        h: f[0],
        bbox: Rect {
            x_lo: f[1],
            x_hi: f[2],
            y_lo: f[3],
            y_hi: f[4],
        },
        nx,
        ny,
        fields,
    })
}
