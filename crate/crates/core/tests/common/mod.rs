//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use fgns::norms::CarlesonWindowSet;
use fgns::params::ModelParams;
use fgns::torus::{SpectralVectorField, TorusGrid};

/// Random real field with no structure (not divergence-free).
pub fn random_field(grid: &TorusGrid, seed: u64) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phys: Vec<Vec<f64>> = (0..grid.dim())
        .map(|_| (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    SpectralVectorField::from_physical(grid, &phys).unwrap()
}

pub fn random_scalar(grid: &TorusGrid, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phys: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    grid.forward_real(&phys)
}

/// `sum_j |c_j|^2` over the components, square-rooted.
pub fn coeff_l2(comps: &[Vec<Complex64>]) -> f64 {
    comps
        .iter()
        .flat_map(|c| c.iter())
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn in_band(k: [i64; 3], n: usize, dim: usize) -> bool {
    k[..dim].iter().all(|&x| 3 * x.unsigned_abs() as usize <= n)
}

/// Coefficients of `a b` by explicit convolution over in-band modes, keeping
/// only in-band outputs.
pub fn direct_product(grid: &TorusGrid, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let dim = grid.dim();
    let n = grid.n();
    let band: Vec<(usize, [i64; 3])> = (0..grid.len())
        .map(|m| (m, grid.wavenumber(m)))
        .filter(|(_, k)| in_band(*k, n, dim))
        .collect();
    let mut out = vec![Complex64::default(); grid.len()];
    for &(p, kp) in &band {
        if a[p] == Complex64::default() {
            continue;
        }
        for &(q, kq) in &band {
            let k = [kp[0] + kq[0], kp[1] + kq[1], kp[2] + kq[2]];
            if !in_band(k, n, dim) {
                continue;
            }
            let m = grid.mode_of(k).unwrap();
            out[m] += a[p] * b[q];
        }
    }
    out
}

/// Distribution-function definition: `sup_lambda lambda |{|f| > lambda}|^{1/q}`,
/// scanning `lambda` just below every attained value.
pub fn lorentz_by_levels(values: &[f64], cell_volume: f64, q: f64) -> f64 {
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut best: f64 = 0.0;
    for &level in &mags {
        if level == 0.0 {
            continue;
        }
        let count = mags.iter().filter(|&&v| v >= level).count();
        best = best.max(level * (count as f64 * cell_volume).powf(1.0 / q));
    }
    best
}

/// `J_1` from its integral form, `(1/pi) int_0^pi cos(th - x sin th) d th`.
pub fn bessel_j1(x: f64) -> f64 {
    let m = 200;
    let h = PI / m as f64;
    let mut s = 0.0;
    for j in 0..=m {
        let th = j as f64 * h;
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        s += w * (th - x * th.sin()).cos();
    }
    s * h / PI
}

/// `int_0^w t^{-g} e^{-b t} dt` for `0 <= g < 1` after `t = w s^{1/(1-g)}`.
pub fn weighted_exp_integral(w: f64, g: f64, b: f64) -> f64 {
    let e = 1.0 / (1.0 - g);
    let m = 400;
    let h = 1.0 / m as f64;
    let f = |s: f64| (-b * w * s.powf(e)).exp();
    let mut acc = f(0.0) + f(1.0);
    for j in 1..m {
        acc += if j % 2 == 1 { 4.0 } else { 2.0 } * f(j as f64 * h);
    }
    w.powf(1.0 - g) * e * acc * h / 3.0
}

/// Exact Carleson sup of the caloric extension over the given windows, in 2-D.
///
/// `|g(t)|^2` is expanded into mode pairs; every pair integrates in closed
/// form over the disc (through `J_1`) and in time (through the weighted
/// exponential integral).
pub fn carleson_of_caloric_2d(
    u0: &SpectralVectorField,
    params: &ModelParams,
    windows: &CarlesonWindowSet,
) -> f64 {
    let grid = u0.grid();
    assert_eq!(grid.dim(), 2);
    let l = grid.box_len();
    let beta = params.beta();
    let g = params.alpha() / beta;
    let modes: Vec<usize> = (0..grid.len())
        .filter(|&m| u0.components().iter().any(|c| c[m].norm() > 1e-14))
        .collect();
    let wave = |m: usize| {
        let k = grid.wavenumber(m);
        [2.0 * PI * k[0] as f64 / l, 2.0 * PI * k[1] as f64 / l]
    };
    let rate = |m: usize| grid.wavevector_norm2(m).powf(beta);
    struct Pair {
        coeff: Complex64,
        xi: [f64; 2],
        rate: f64,
    }
    let mut pairs = Vec::new();
    for &a in &modes {
        for &b in &modes {
            let coeff: Complex64 = u0
                .components()
                .iter()
                .map(|c| c[a] * c[b].conj())
                .sum();
            let (wa, wb) = (wave(a), wave(b));
            pairs.push(Pair {
                coeff,
                xi: [wa[0] - wb[0], wa[1] - wb[1]],
                rate: rate(a) + rate(b),
            });
        }
    }
    let centers = windows.centers(grid);
    let mut best: f64 = 0.0;
    for &r in windows.radii() {
        let w = r.powf(2.0 * beta);
        let weights: Vec<Complex64> = pairs
            .iter()
            .map(|p| {
                let rho = (p.xi[0] * p.xi[0] + p.xi[1] * p.xi[1]).sqrt();
                let disc = if rho == 0.0 {
                    PI * r * r
                } else {
                    2.0 * PI * r * bessel_j1(rho * r) / rho
                };
                p.coeff * disc * weighted_exp_integral(w, g, p.rate)
            })
            .collect();
        let scale = r.powf(params.carleson_exponent());
        for &c in &centers {
            let x = grid.point(c);
            let s: Complex64 = pairs
                .iter()
                .zip(&weights)
                .map(|(p, wt)| wt * Complex64::from_polar(1.0, p.xi[0] * x[0] + p.xi[1] * x[1]))
                .sum();
            best = best.max(s.re * scale);
        }
    }
    best.sqrt()
}

/// `u0 -> lambda^{2 beta - 1} u0(lambda x)` for an integer `lambda`, exact on
/// the coefficients.
pub fn dilate(u0: &SpectralVectorField, lambda: i64, beta: f64) -> SpectralVectorField {
    let grid = u0.grid();
    let amp = (lambda as f64).powf(2.0 * beta - 1.0);
    let mut comps = vec![vec![Complex64::default(); grid.len()]; grid.dim()];
    for m in 0..grid.len() {
        let k = grid.wavenumber(m);
        if u0.components().iter().all(|c| c[m] == Complex64::default()) {
            continue;
        }
        let target = grid
            .mode_of([lambda * k[0], lambda * k[1], lambda * k[2]])
            .expect("dilated mode must stay on the grid");
        for (o, c) in comps.iter_mut().zip(u0.components()) {
            o[target] = c[m] * amp;
        }
    }
    SpectralVectorField::from_coeffs(grid, comps)
        .unwrap()
        .mark_divergence_free(1e-10)
        .unwrap()
}

/// Spectral point evaluation of a real field.
pub fn eval_at(grid: &TorusGrid, coeffs: &[Complex64], x: [f64; 3]) -> f64 {
    let l = grid.box_len();
    let dim = grid.dim();
    let mut s = 0.0;
    for (m, c) in coeffs.iter().enumerate() {
        if *c == Complex64::default() {
            continue;
        }
        let k = grid.wavenumber(m);
        let phase: f64 = (0..dim).map(|a| 2.0 * PI * k[a] as f64 * x[a] / l).sum();
        s += (c * Complex64::from_polar(1.0, phase)).re;
    }
    s
}
