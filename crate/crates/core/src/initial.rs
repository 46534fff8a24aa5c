//! Smooth divergence-free initial data.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::duhamel::bump;
use crate::error::{FgnsError, Result};
use crate::torus::{leray_project, SpectralVectorField, TorusGrid};

/// Tolerance used to flag generated data as divergence-free.
pub const GENERATED_DIVFREE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    TaylorGreen,
    /// Shells 1 and 2 with weights 1 and 1/2.
    TaylorGreenPair,
    RandomBandlimited,
    CurlBump,
}

impl FromStr for InitialKind {
    type Err = FgnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor_green" => Ok(Self::TaylorGreen),
            "taylor_green_pair" => Ok(Self::TaylorGreenPair),
            "random_bandlimited" => Ok(Self::RandomBandlimited),
            "curl_bump" => Ok(Self::CurlBump),
            other => Err(FgnsError::param(format!(
                "unknown initial data kind `{other}` (expected taylor_green, taylor_green_pair, random_bandlimited or curl_bump)"
            ))),
        }
    }
}

impl InitialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TaylorGreen => "taylor_green",
            Self::TaylorGreenPair => "taylor_green_pair",
            Self::RandomBandlimited => "random_bandlimited",
            Self::CurlBump => "curl_bump",
        }
    }
}

/// Highest wavenumber used by `random_bandlimited` through the generic entry point.
pub const DEFAULT_BAND: i64 = 4;

pub fn generate_initial_data(
    kind: InitialKind,
    amplitude: f64,
    seed: u64,
    grid: &TorusGrid,
) -> Result<SpectralVectorField> {
    match kind {
        InitialKind::TaylorGreen => taylor_green(grid, amplitude),
        InitialKind::TaylorGreenPair => taylor_green_shells(grid, &[(1, 1.0), (2, 0.5)], amplitude),
        InitialKind::RandomBandlimited => random_bandlimited(grid, DEFAULT_BAND, amplitude, seed),
        InitialKind::CurlBump => curl_bump(grid, amplitude),
    }
}

fn scale_to_speed(u: SpectralVectorField, amplitude: f64) -> Result<SpectralVectorField> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(FgnsError::param(format!("amplitude must be nonnegative, got {amplitude}")));
    }
    let m = u.linf_norm();
    if m == 0.0 {
        return Ok(u);
    }
    u.scale(amplitude / m).mark_divergence_free(GENERATED_DIVFREE_TOL)
}

/// `(sin kx cos ky, -cos kx sin ky)` in 2-D and
/// `(sin kx cos ky cos kz, -cos kx sin ky cos kz, 0)` in 3-D, with `k` in units
/// of `2 pi / L`. Unscaled.
fn taylor_green_shell(grid: &TorusGrid, k: usize) -> Result<SpectralVectorField> {
    let w = 2.0 * PI * k as f64 / grid.box_len();
    let dim = grid.dim();
    let mut phys = vec![vec![0.0; grid.len()]; dim];
    for i in 0..grid.len() {
        let x = grid.point(i);
        let cz = if dim == 3 { (w * x[2]).cos() } else { 1.0 };
        phys[0][i] = (w * x[0]).sin() * (w * x[1]).cos() * cz;
        phys[1][i] = -(w * x[0]).cos() * (w * x[1]).sin() * cz;
    }
    let u = SpectralVectorField::from_physical(grid, &phys)?;
    // strips the roundoff divergence of the samples
    Ok(leray_project(&u))
}

/// Taylor-Green vortex with maximal speed `amplitude`.
pub fn taylor_green(grid: &TorusGrid, amplitude: f64) -> Result<SpectralVectorField> {
    taylor_green_shells(grid, &[(1, 1.0)], amplitude)
}

/// Superposition `sum_j w_j TG_{k_j}`, rescaled to maximal speed `amplitude`.
/// A single shell is a steady state of the nonlinearity; two shells are not.
pub fn taylor_green_shells(
    grid: &TorusGrid,
    shells: &[(usize, f64)],
    amplitude: f64,
) -> Result<SpectralVectorField> {
    let mut u = SpectralVectorField::zeros(grid);
    for &(k, w) in shells {
        if k == 0 || 3 * k > grid.n() {
            return Err(FgnsError::param(format!(
                "Taylor-Green wavenumber {k} is outside the resolved band"
            )));
        }
        u = u.lin_comb(1.0, &taylor_green_shell(grid, k)?, w)?;
    }
    scale_to_speed(u, amplitude)
}

/// Random Leray-projected field supported on `0 < |k|_inf <= band`, with
/// coefficients decaying like `1/(1+|k|^2)`. Deterministic in `seed`.
pub fn random_bandlimited(
    grid: &TorusGrid,
    band: i64,
    amplitude: f64,
    seed: u64,
) -> Result<SpectralVectorField> {
    if band < 1 || 3 * band > grid.n() as i64 {
        return Err(FgnsError::param(format!(
            "band {band} must satisfy 1 <= band <= N/3"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let mut comps = vec![vec![Complex64::default(); grid.len()]; dim];
    for m in 0..grid.len() {
        let k = grid.wavenumber(m);
        if k[..dim].iter().all(|&x| x == 0) || k[..dim].iter().any(|&x| x.abs() > band) {
            continue;
        }
        let c = grid.conjugate_mode(m);
        if c < m {
            continue;
        }
        let decay = 1.0 / (1.0 + grid.wavenumber_norm2(m) as f64);
        for comp in comps.iter_mut() {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            comp[m] = z;
            comp[c] = z.conj();
        }
    }
    let u = SpectralVectorField::from_coeffs(grid, comps)?;
    scale_to_speed(leray_project(&u), amplitude)
}

/// Radius of the stream-function bump relative to `L/4`.
const CURL_BUMP_RADIUS: f64 = 0.8;

/// Curl of a smooth compactly supported stream function centered in the box,
/// supported in `|x - c| < 0.8 L/4`. The curl is taken spectrally so that the
/// discrete divergence vanishes to roundoff.
pub fn curl_bump(grid: &TorusGrid, amplitude: f64) -> Result<SpectralVectorField> {
    let dim = grid.dim();
    let l = grid.box_len();
    let radius = CURL_BUMP_RADIUS * l / 4.0;
    let stream: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let r2: f64 = x[..dim].iter().map(|&c| (c - l / 2.0).powi(2)).sum();
            bump(r2.sqrt() / radius)
        })
        .collect();
    let psi = grid.forward_real(&stream);
    let mut comps = vec![vec![Complex64::default(); grid.len()]; dim];
    for m in 0..grid.len() {
        let k = grid.deriv_wavevector(m);
        let i = Complex64::new(0.0, 1.0);
        comps[0][m] = i * k[1] * psi[m];
        comps[1][m] = -i * k[0] * psi[m];
    }
    let u = SpectralVectorField::from_coeffs(grid, comps)?;
    scale_to_speed(u, amplitude)
}
