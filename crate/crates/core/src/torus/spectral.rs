//! Spectral operators on the torus: Leray projection, the fractional heat
//! semigroup, the dealiased quadratic product and the tensor divergence.

use rustfft::num_complex::Complex64;

use super::field::{SpectralTensorField, SpectralVectorField};
use super::grid::TorusGrid;
use crate::error::{FgnsError, Result};

/// `(I - xi xi^T / |xi|^2) u(xi)`, identity at `xi = 0`.
pub fn leray_project(u: &SpectralVectorField) -> SpectralVectorField {
    let grid = u.grid().clone();
    let mut comps = u.components().to_vec();
    project_in_place(&grid, &mut comps);
    SpectralVectorField::from_parts(&grid, comps, true)
}

pub(crate) fn project_in_place(grid: &TorusGrid, comps: &mut [Vec<Complex64>]) {
    let dim = grid.dim();
    for (m, k) in grid.kderiv().iter().enumerate() {
        let k2: f64 = k[..dim].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::default();
        for a in 0..dim {
            dot += comps[a][m] * k[a];
        }
        let f = dot / k2;
        for a in 0..dim {
            comps[a][m] -= f * k[a];
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.5 && beta <= 1.0) {
        return Err(FgnsError::param(format!(
            "beta must lie in (1/2, 1], got {beta}"
        )));
    }
    Ok(())
}

/// `exp(-t |xi|^(2 beta))` for every mode of the grid.
pub fn semigroup_symbol(grid: &TorusGrid, t: f64, beta: f64) -> Vec<f64> {
    grid.kmag2()
        .iter()
        .map(|&k2| if k2 == 0.0 { 1.0 } else { (-t * k2.powf(beta)).exp() })
        .collect()
}

/// `|xi|^(2 beta)` for every mode.
pub fn fractional_symbol(grid: &TorusGrid, beta: f64) -> Vec<f64> {
    grid.kmag2().iter().map(|&k2| k2.powf(beta)).collect()
}

/// Applies `exp(-t (-Delta)^beta)`.
pub fn fractional_semigroup(
    u: &SpectralVectorField,
    t: f64,
    beta: f64,
) -> Result<SpectralVectorField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FgnsError::param(format!(
            "semigroup time must be nonnegative, got {t}"
        )));
    }
    check_beta(beta)?;
    if t == 0.0 {
        return Ok(u.clone());
    }
    let symbol = semigroup_symbol(u.grid(), t, beta);
    Ok(apply_symbol(u, &symbol))
}

/// Multiplies every component by a real even symbol.
pub(crate) fn apply_symbol(u: &SpectralVectorField, symbol: &[f64]) -> SpectralVectorField {
    let comps = u
        .components()
        .iter()
        .map(|c| c.iter().zip(symbol).map(|(z, s)| z * s).collect())
        .collect();
    SpectralVectorField::from_parts(u.grid(), comps, u.is_divergence_free())
}

fn dealias(grid: &TorusGrid, c: &mut [Complex64]) {
    for (m, z) in c.iter_mut().enumerate() {
        if !grid.in_dealias_band(m) {
            *z = Complex64::default();
        }
    }
}

fn to_physical_dealiased(grid: &TorusGrid, comps: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    comps
        .iter()
        .map(|c| {
            let mut buf = c.clone();
            dealias(grid, &mut buf);
            grid.inverse(&mut buf);
            buf.into_iter().map(|z| z.re).collect()
        })
        .collect()
}

/// Spectral coefficients of `u_i v_j` with the 2/3 rule applied to the factors
/// and to the product.
pub fn nonlinear_tensor(
    u: &SpectralVectorField,
    v: &SpectralVectorField,
) -> Result<SpectralTensorField> {
    u.check_grid(v)?;
    let grid = u.grid();
    let dim = grid.dim();
    let up = to_physical_dealiased(grid, u.components());
    let vp = to_physical_dealiased(grid, v.components());
    let mut comps = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut buf: Vec<Complex64> = up[i]
                .iter()
                .zip(&vp[j])
                .map(|(a, b)| Complex64::new(a * b, 0.0))
                .collect();
            grid.forward(&mut buf);
            dealias(grid, &mut buf);
            comps.push(buf);
        }
    }
    Ok(SpectralTensorField::from_parts(grid, comps))
}

/// Component `i` is `sum_j i xi_j T_ij`.
pub fn tensor_divergence(t: &SpectralTensorField) -> SpectralVectorField {
    let grid = t.grid();
    let dim = grid.dim();
    let kd = grid.kderiv();
    let mut out = vec![vec![Complex64::default(); grid.len()]; dim];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..dim {
            let tij = t.component(i, j);
            for (m, z) in o.iter_mut().enumerate() {
                *z += Complex64::new(0.0, kd[m][j]) * tij[m];
            }
        }
    }
    SpectralVectorField::from_parts(grid, out, false)
}

/// `P div(a (x) b)` in the transport convention `sum_j d_j (a_j b_i)`, i.e. the
/// velocity `a` advects `b`. The factors are given as coefficients.
///
/// When `same` is set the caller guarantees `a == b`, and only the symmetric
/// half of the product is transformed.
pub(crate) fn projected_flux(
    grid: &TorusGrid,
    a: &[Vec<Complex64>],
    b: &[Vec<Complex64>],
    same: bool,
) -> Vec<Vec<Complex64>> {
    let dim = grid.dim();
    let ap = to_physical_dealiased(grid, a);
    let bp = if same {
        ap.clone()
    } else {
        to_physical_dealiased(grid, b)
    };
    // prod[(j, i)] = a_j b_i
    let mut prod: Vec<Option<Vec<Complex64>>> = vec![None; dim * dim];
    for j in 0..dim {
        for i in 0..dim {
            if same && i < j {
                continue;
            }
            let mut buf: Vec<Complex64> = ap[j]
                .iter()
                .zip(&bp[i])
                .map(|(x, y)| Complex64::new(x * y, 0.0))
                .collect();
            grid.forward(&mut buf);
            dealias(grid, &mut buf);
            prod[j * dim + i] = Some(buf);
        }
    }
    let kd = grid.kderiv();
    let mut out = vec![vec![Complex64::default(); grid.len()]; dim];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..dim {
            let idx = if same && i < j { i * dim + j } else { j * dim + i };
            let p = prod[idx].as_ref().expect("product computed");
            for (m, z) in o.iter_mut().enumerate() {
                *z += Complex64::new(0.0, kd[m][j]) * p[m];
            }
        }
    }
    project_in_place(grid, &mut out);
    out
}
