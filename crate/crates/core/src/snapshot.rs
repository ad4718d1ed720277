//! Flat binary container for lattice fields.
//!
//! Layout, all little-endian: `n` as `u64`, `L` as `f64`, the time tag as
//! `f64`, then one or more blocks of `n³` doubles in row-major `(i, j, k)`
//! order. A distribution is one block; a coefficient field is ten, in
//! [`Component`](crate::coefficients::Component) order.

use std::io::{Read, Write};

use crate::coefficients::CoefficientField;
use crate::error::{LandauError, Result};
use crate::grid::{Distribution, VelocityGrid};

const HEADER: usize = 24;

pub fn write_fields(
    w: &mut impl Write,
    grid: &VelocityGrid,
    time: f64,
    fields: &[&[f64]],
) -> Result<()> {
    if let Some(bad) = fields.iter().position(|f| f.len() != grid.len()) {
        return Err(LandauError::GridMismatch(format!(
            "block {bad} has {} values, grid has {}",
            fields[bad].len(),
            grid.len()
        )));
    }
    let mut buf = Vec::with_capacity(HEADER + 8 * grid.len() * fields.len());
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.extent().to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for field in fields {
        for v in field.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Grid, time tag and every payload block.
pub fn read_fields(r: &mut impl Read) -> Result<(VelocityGrid, f64, Vec<Vec<f64>>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER {
        return Err(LandauError::Snapshot(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8-byte slice") };
    let n = u64::from_le_bytes(word(0));
    let extent = f64::from_le_bytes(word(8));
    let time = f64::from_le_bytes(word(16));
    let n =
        usize::try_from(n).map_err(|_| LandauError::Snapshot(format!("n = {n} does not fit")))?;
    let grid = VelocityGrid::new(n, extent).map_err(|e| LandauError::Snapshot(e.to_string()))?;
    let block = 8 * grid.len();
    let payload = bytes.len() - HEADER;
    if payload == 0 || !payload.is_multiple_of(block) {
        return Err(LandauError::Snapshot(format!(
            "payload of {payload} bytes is not a whole number of {n}³ blocks"
        )));
    }
    let fields = bytes[HEADER..]
        .chunks_exact(block)
        .map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect()
        })
        .collect();
    Ok((grid, time, fields))
}

pub fn write_distribution(w: &mut impl Write, f: &Distribution) -> Result<()> {
    write_fields(w, f.grid(), f.time(), &[f.values()])
}

pub fn read_distribution(r: &mut impl Read) -> Result<Distribution> {
    let (grid, time, mut fields) = read_fields(r)?;
    if fields.len() != 1 {
        return Err(LandauError::Snapshot(format!(
            "expected one block, found {}",
            fields.len()
        )));
    }
    Distribution::new(grid, fields.remove(0), time)
}

pub fn write_coefficients(w: &mut impl Write, c: &CoefficientField, time: f64) -> Result<()> {
    let parts = c.to_components();
    let refs: Vec<&[f64]> = parts.iter().map(Vec::as_slice).collect();
    write_fields(w, c.grid(), time, &refs)
}

pub fn read_coefficients(r: &mut impl Read) -> Result<(CoefficientField, f64)> {
    let (grid, time, fields) = read_fields(r)?;
    Ok((CoefficientField::from_components(grid, fields)?, time))
}
