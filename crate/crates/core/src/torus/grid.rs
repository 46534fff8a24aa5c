use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{FgnsError, Result};

/// Periodic box `[0, L)^dim` sampled at `N` points per axis.
///
/// Storage is row-major with axis 0 slowest. Mode `j` along an axis carries
/// the integer wavenumber `k = j` for `j < N/2` and `k = j - N` otherwise, so
/// the wavenumber set is `[-N/2, N/2)`.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    box_len: f64,
    len: usize,
    /// Integer wavenumbers per mode (unused axes are 0).
    kint: Vec<[i64; 3]>,
    /// Physical wavevector used for derivatives; the Nyquist component is zeroed
    /// so that odd symbols keep real fields real.
    kderiv: Vec<[f64; 3]>,
    /// True `|xi|^2`, Nyquist included.
    kmag2: Vec<f64>,
    fft: FftNd,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("box_len", &self.box_len())
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.n() == other.n()
                && self.box_len().to_bits() == other.box_len().to_bits())
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, box_len: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(FgnsError::param(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(FgnsError::param(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return Err(FgnsError::param(format!(
                "box length must be positive, got {box_len}"
            )));
        }
        let len = n.pow(dim as u32);
        let scale = 2.0 * PI / box_len;
        let mut kint = Vec::with_capacity(len);
        let mut kderiv = Vec::with_capacity(len);
        let mut kmag2 = Vec::with_capacity(len);
        for flat in 0..len {
            let idx = unflatten(flat, n, dim);
            let mut ki = [0i64; 3];
            let mut kd = [0.0; 3];
            let mut m2 = 0.0;
            for a in 0..dim {
                let k = signed_wavenumber(idx[a], n);
                ki[a] = k;
                let xi = scale * k as f64;
                m2 += xi * xi;
                if 2 * k.unsigned_abs() as usize != n {
                    kd[a] = xi;
                }
            }
            kint.push(ki);
            kderiv.push(kd);
            kmag2.push(m2);
        }
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                box_len,
                len,
                kint,
                kderiv,
                kmag2,
                fft: FftNd::new(n, dim),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn box_len(&self) -> f64 {
        self.inner.box_len
    }

    pub fn spacing(&self) -> f64 {
        self.inner.box_len / self.inner.n as f64
    }

    /// Number of grid points (and of Fourier modes), `N^dim`.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.inner.box_len.powi(self.inner.dim as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.inner.dim as i32)
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        unflatten(flat, self.inner.n, self.inner.dim)
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let n = self.inner.n;
        (0..self.inner.dim).fold(0, |acc, a| acc * n + idx[a])
    }

    /// Flat index of the grid point `idx + offset`, wrapped periodically.
    pub fn wrapped_index(&self, idx: [usize; 3], offset: [i64; 3]) -> usize {
        let n = self.inner.n as i64;
        (0..self.inner.dim).fold(0, |acc, a| {
            let j = (idx[a] as i64 + offset[a]).rem_euclid(n);
            acc * self.inner.n + j as usize
        })
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.inner.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    pub fn wavenumber(&self, mode: usize) -> [i64; 3] {
        self.inner.kint[mode]
    }

    pub fn deriv_wavevector(&self, mode: usize) -> [f64; 3] {
        self.inner.kderiv[mode]
    }

    pub fn wavevector_norm2(&self, mode: usize) -> f64 {
        self.inner.kmag2[mode]
    }

    pub(crate) fn kderiv(&self) -> &[[f64; 3]] {
        &self.inner.kderiv
    }

    pub(crate) fn kmag2(&self) -> &[f64] {
        &self.inner.kmag2
    }

    /// Integer `|k|^2` of a mode, useful as an exact radial key.
    pub fn wavenumber_norm2(&self, mode: usize) -> i64 {
        self.inner.kint[mode].iter().map(|k| k * k).sum()
    }

    /// Mode index holding the wavenumber `-k` (mod N).
    pub fn conjugate_mode(&self, mode: usize) -> usize {
        let n = self.inner.n;
        let idx = self.multi_index(mode);
        let mut c = [0usize; 3];
        for a in 0..self.inner.dim {
            c[a] = (n - idx[a]) % n;
        }
        self.flat_index(c)
    }

    /// Mode index of an integer wavenumber, if representable.
    pub fn mode_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.inner.n as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.inner.dim {
            if k[a] < -n / 2 || k[a] >= n / 2 {
                return None;
            }
            idx[a] = k[a].rem_euclid(n) as usize;
        }
        for &ka in &k[self.inner.dim..] {
            if ka != 0 {
                return None;
            }
        }
        Some(self.flat_index(idx))
    }

    /// True when every component satisfies `3|k_a| <= N` (2/3-rule pass band).
    pub fn in_dealias_band(&self, mode: usize) -> bool {
        let n = self.inner.n as i64;
        self.inner.kint[mode][..self.inner.dim]
            .iter()
            .all(|k| 3 * k.abs() <= n)
    }

    /// Physical samples -> Fourier-series coefficients (normalized by `N^dim`).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.inner.fft.forward(data);
    }

    /// Fourier-series coefficients -> physical samples.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inner.fft.inverse(data);
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

pub(crate) fn signed_wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn unflatten(mut flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for a in (0..dim).rev() {
        idx[a] = flat % n;
        flat /= n;
    }
    idx
}

/// Separable complex FFT over a row-major `n^dim` block.
pub(crate) struct FftNd {
    n: usize,
    dim: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub(crate) fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.fwd);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &*self.inv);
    }

    fn transform(&self, data: &mut [Complex64], plan: &dyn Fft<f64>) {
        let n = self.n;
        let len = data.len();
        debug_assert_eq!(len, n.pow(self.dim as u32));
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut lane = vec![Complex64::default(); n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            let block = stride * n;
            for start in (0..len).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for (m, l) in lane.iter_mut().enumerate() {
                        *l = data[base + m * stride];
                    }
                    plan.process_with_scratch(&mut lane, &mut scratch);
                    for (m, l) in lane.iter().enumerate() {
                        data[base + m * stride] = *l;
                    }
                }
            }
        }
    }
}
