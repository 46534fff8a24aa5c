use rustfft::num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{FgnsError, Result};

/// Default tolerance for the divergence-free flag.
pub const DIVFREE_TOL: f64 = 1e-10;

/// Relative tolerance of the Hermitian-symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Real vector field on a torus, stored as Fourier-series coefficients.
///
/// `u(x) = sum_k coeff(k) exp(i xi_k . x)`. Coefficients are Hermitian
/// (`coeff(-k) = conj(coeff(k))`) because the physical field is real.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    grid: TorusGrid,
    comps: Vec<Vec<Complex64>>,
    divfree: bool,
    divfree_tol: f64,
}

impl SpectralVectorField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        let comps = vec![vec![Complex64::default(); grid.len()]; grid.dim()];
        Self {
            grid: grid.clone(),
            comps,
            divfree: true,
            divfree_tol: DIVFREE_TOL,
        }
    }

    /// Builds a field from physical samples, one slice per component.
    pub fn from_physical(grid: &TorusGrid, values: &[Vec<f64>]) -> Result<Self> {
        if values.len() != grid.dim() || values.iter().any(|v| v.len() != grid.len()) {
            return Err(FgnsError::param(
                "physical data must have dim components of N^dim samples",
            ));
        }
        let comps = values.iter().map(|v| grid.forward_real(v)).collect();
        Ok(Self {
            grid: grid.clone(),
            comps,
            divfree: false,
            divfree_tol: DIVFREE_TOL,
        })
    }

    /// Builds a field from coefficients, rejecting non-Hermitian input.
    pub fn from_coeffs(grid: &TorusGrid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.len() != grid.dim() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(FgnsError::param(
                "coefficient data must have dim components of N^dim modes",
            ));
        }
        let field = Self {
            grid: grid.clone(),
            comps,
            divfree: false,
            divfree_tol: DIVFREE_TOL,
        };
        let defect = field.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(FgnsError::NotHermitian(defect));
        }
        Ok(field)
    }

    /// Internal constructor for results of symbol multiplications, which are
    /// Hermitian by construction.
    pub(crate) fn from_parts(grid: &TorusGrid, comps: Vec<Vec<Complex64>>, divfree: bool) -> Self {
        Self {
            grid: grid.clone(),
            comps,
            divfree,
            divfree_tol: DIVFREE_TOL,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.comps[i]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divfree
    }

    pub fn divfree_tol(&self) -> f64 {
        self.divfree_tol
    }

    /// Checks `|xi . u(xi)| <= tol * max(1, |u(xi)|)` on every mode and sets
    /// the flag when it holds.
    pub fn mark_divergence_free(mut self, tol: f64) -> Result<Self> {
        let defect = self.divergence_defect();
        if defect > tol {
            return Err(FgnsError::NotDivergenceFree(defect));
        }
        self.divfree = true;
        self.divfree_tol = tol;
        Ok(self)
    }

    /// `max_xi |xi . u(xi)| / max(1, |u(xi)|)`.
    pub fn divergence_defect(&self) -> f64 {
        let kd = self.grid.kderiv();
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for (m, k) in kd.iter().enumerate() {
            let mut div = Complex64::default();
            let mut mag2 = 0.0;
            for a in 0..dim {
                let c = self.comps[a][m];
                div += c * k[a];
                mag2 += c.norm_sqr();
            }
            worst = worst.max(div.norm() / mag2.sqrt().max(1.0));
        }
        worst
    }

    /// Maximum of the physical divergence `|div u(x)|` over the grid.
    pub fn divergence_linf(&self) -> f64 {
        let kd = self.grid.kderiv();
        let mut div: Vec<Complex64> = vec![Complex64::default(); self.grid.len()];
        for a in 0..self.dim() {
            for (m, d) in div.iter_mut().enumerate() {
                *d += Complex64::new(0.0, kd[m][a]) * self.comps[a][m];
            }
        }
        self.grid.inverse(&mut div);
        div.iter().map(|c| c.re.abs()).fold(0.0, f64::max)
    }

    /// Largest relative violation of `coeff(-k) = conj(coeff(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for comp in &self.comps {
            for m in 0..self.grid.len() {
                let c = self.grid.conjugate_mode(m);
                worst = worst.max((comp[c] - comp[m].conj()).norm());
            }
        }
        worst / scale
    }

    /// Physical samples of each component.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| self.grid.inverse_real(c)).collect()
    }

    /// Pointwise Euclidean magnitude `|u(x)|` on the grid.
    pub fn magnitude(&self) -> Vec<f64> {
        let phys = self.to_physical();
        (0..self.grid.len())
            .map(|i| phys.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// Pointwise `|u(x)|^2` on the grid.
    pub fn magnitude_squared(&self) -> Vec<f64> {
        let phys = self.to_physical();
        (0..self.grid.len())
            .map(|i| phys.iter().map(|c| c[i] * c[i]).sum::<f64>())
            .collect()
    }

    /// `max_x |u(x)|` over grid points.
    pub fn linf_norm(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    /// Physical `L^2` norm from the coefficients (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|c| c.norm_sqr())
            .sum();
        (self.grid.volume() * s).sqrt()
    }

    /// Physical `L^2` inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        Ok(self.grid.volume() * s)
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(FgnsError::GridMismatch);
        }
        Ok(())
    }

    pub fn scale(&self, a: f64) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|c| c.iter().map(|z| z * a).collect())
            .collect();
        Self::from_parts(&self.grid, comps, self.divfree)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_grid(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * a + q * b).collect())
            .collect();
        Ok(Self::from_parts(
            &self.grid,
            comps,
            self.divfree && other.divfree,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Largest coefficient difference, used for bitwise/round-off comparisons.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// `dim x dim` tensor field in spectral form; component `(i, j)` lives at
/// index `i * dim + j`.
#[derive(Clone, Debug)]
pub struct SpectralTensorField {
    grid: TorusGrid,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralTensorField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        let d = grid.dim();
        Self {
            grid: grid.clone(),
            comps: vec![vec![Complex64::default(); grid.len()]; d * d],
        }
    }

    pub fn from_physical(grid: &TorusGrid, values: &[Vec<f64>]) -> Result<Self> {
        let d = grid.dim();
        if values.len() != d * d || values.iter().any(|v| v.len() != grid.len()) {
            return Err(FgnsError::param(
                "tensor data must have dim^2 components of N^dim samples",
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            comps: values.iter().map(|v| grid.forward_real(v)).collect(),
        })
    }

    pub(crate) fn from_parts(grid: &TorusGrid, comps: Vec<Vec<Complex64>>) -> Self {
        Self {
            grid: grid.clone(),
            comps,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn component(&self, i: usize, j: usize) -> &[Complex64] {
        &self.comps[i * self.grid.dim() + j]
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| self.grid.inverse_real(c)).collect()
    }
}
