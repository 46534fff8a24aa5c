//! Binary snapshots of spectral fields and trajectory directories.
//!
//! Layout (little-endian): `b"FGNS"`, `u32` version, `u8` dim, `u64` N,
//! `f64` L, `f64` time, `u8` component count, then for each component
//! `N^dim` pairs `(re, im)` of `f64`. Wavevectors run through `[-N/2, N/2)`
//! on every axis, row-major with axis 0 slowest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;

use crate::duhamel::{TimeMesh, TrajectoryField};
use crate::error::{FgnsError, Result};
use crate::torus::{SpectralVectorField, TorusGrid, DIVFREE_TOL};

pub const MAGIC: &[u8; 4] = b"FGNS";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 1 + 8 + 8 + 8 + 1;

/// Storage position of every mode in ascending-wavevector order.
fn ascending_order(grid: &TorusGrid) -> Vec<usize> {
    let n = grid.n() as i64;
    let dim = grid.dim();
    (0..grid.len())
        .map(|pos| {
            let mut k = [0i64; 3];
            let mut rem = pos;
            for a in (0..dim).rev() {
                k[a] = (rem % grid.n()) as i64 - n / 2;
                rem /= grid.n();
            }
            grid.mode_of(k).expect("wavevector in range")
        })
        .collect()
}

pub fn encode(field: &SpectralVectorField, time: f64) -> Vec<u8> {
    let grid = field.grid();
    let order = ascending_order(grid);
    let mut out = Vec::with_capacity(HEADER_LEN + field.dim() * grid.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(grid.dim() as u8);
    out.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    out.extend_from_slice(&grid.box_len().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    out.push(field.dim() as u8);
    for comp in field.components() {
        for &m in &order {
            out.extend_from_slice(&comp[m].re.to_le_bytes());
            out.extend_from_slice(&comp[m].im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| FgnsError::Format("snapshot truncated".into()))?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Decodes a snapshot; `grid` is reused when it matches the header.
pub fn decode(bytes: &[u8], grid: Option<&TorusGrid>) -> Result<(SpectralVectorField, f64)> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(FgnsError::Format("bad magic, not an FGNS snapshot".into()));
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != VERSION {
        return Err(FgnsError::Format(format!("unsupported snapshot version {version}")));
    }
    let dim = r.take::<1>()?[0] as usize;
    let n = u64::from_le_bytes(r.take()?) as usize;
    let box_len = r.f64()?;
    let time = r.f64()?;
    let comps = r.take::<1>()?[0] as usize;
    if comps != dim {
        return Err(FgnsError::Format(format!(
            "component count {comps} does not match dimension {dim}"
        )));
    }
    let grid = match grid {
        Some(g) if g.dim() == dim && g.n() == n && g.box_len().to_bits() == box_len.to_bits() => {
            g.clone()
        }
        _ => TorusGrid::new(dim, n, box_len)?,
    };
    let expected = HEADER_LEN + comps * grid.len() * 16;
    if bytes.len() != expected {
        return Err(FgnsError::Format(format!(
            "snapshot has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let order = ascending_order(&grid);
    let mut data = vec![vec![Complex64::default(); grid.len()]; comps];
    for comp in data.iter_mut() {
        for &m in &order {
            let re = r.f64()?;
            let im = r.f64()?;
            comp[m] = Complex64::new(re, im);
        }
    }
    let field = SpectralVectorField::from_coeffs(&grid, data)?;
    let field = if field.divergence_defect() <= DIVFREE_TOL {
        field.mark_divergence_free(DIVFREE_TOL)?
    } else {
        field
    };
    Ok((field, time))
}

pub fn write_snapshot(path: &Path, field: &SpectralVectorField, time: f64) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&encode(field, time))?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SpectralVectorField, f64)> {
    decode(&fs::read(path)?, None)
}

fn state_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("state_{i:04}.fgns"))
}

/// One snapshot per node, named `state_0000.fgns`, `state_0001.fgns`, ...
pub fn write_trajectory(dir: &Path, traj: &TrajectoryField) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, (s, &t)) in traj.states().iter().zip(traj.mesh().nodes()).enumerate() {
        write_snapshot(&state_path(dir, i), s, t)?;
    }
    Ok(())
}

pub fn read_trajectory(dir: &Path) -> Result<TrajectoryField> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map_or(false, |n| n.starts_with("state_") && n.ends_with(".fgns"))
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(FgnsError::Format(format!("no snapshots in {}", dir.display())));
    }
    let mut states = Vec::with_capacity(names.len());
    let mut times = Vec::with_capacity(names.len());
    let mut grid: Option<TorusGrid> = None;
    for p in &names {
        let (f, t) = decode(&fs::read(p)?, grid.as_ref())?;
        grid.get_or_insert_with(|| f.grid().clone());
        states.push(f);
        times.push(t);
    }
    TrajectoryField::new(TimeMesh::from_nodes(times)?, states)
}
