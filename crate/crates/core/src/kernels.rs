//! Real-space fractional heat and Oseen kernels by Fourier inversion on an
//! auxiliary periodic grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{FgnsError, Result};
use crate::torus::{check_beta, TorusGrid};

const MAX_AUX_POINTS: usize = 1 << 22;

/// Auxiliary box used only for kernel inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelGrid {
    pub n_aux: usize,
    pub box_len: f64,
    pub dim: usize,
}

impl KernelGrid {
    pub fn new(n_aux: usize, box_len: f64, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(FgnsError::param(format!("dim must be 2 or 3, got {dim}")));
        }
        if n_aux < 8 || n_aux % 2 != 0 {
            return Err(FgnsError::param(format!(
                "auxiliary resolution must be even and >= 8, got {n_aux}"
            )));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return Err(FgnsError::param(format!("box length must be positive, got {box_len}")));
        }
        Ok(Self {
            n_aux,
            box_len,
            dim,
        })
    }

    /// Auxiliary grid with at least 4x the solver resolution on at least a 2x box.
    pub fn for_solver(grid: &TorusGrid) -> Result<Self> {
        Self::new(4 * grid.n(), 2.0 * grid.box_len(), grid.dim())
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n_aux as f64
    }

    /// Largest radius inside the inner half-box.
    pub fn inner_radius(&self) -> f64 {
        self.box_len / 4.0
    }

    fn wavevector(&self, j: usize) -> f64 {
        let n = self.n_aux;
        let k = if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        };
        2.0 * PI * k as f64 / self.box_len
    }

    fn full_grid(&self) -> Result<TorusGrid> {
        let len = self.n_aux.pow(self.dim as u32);
        if len > MAX_AUX_POINTS {
            return Err(FgnsError::GridTooLarge(len));
        }
        TorusGrid::new(self.dim, self.n_aux, self.box_len)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(FgnsError::param(format!("kernel time must be positive, got {t}")));
    }
    Ok(())
}

/// Which quantity a table row holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelComponent {
    /// Radial heat kernel.
    Scalar,
    /// Frobenius norm of the Oseen tensor.
    Magnitude,
    /// Oseen entry `(i, j, k)`: projector row `i`, derivative `j`, projector column `k`.
    Tensor(usize, usize, usize),
}

/// Direction of a tabulation ray.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ray {
    Axis,
    Diagonal,
}

impl Ray {
    fn as_str(self) -> &'static str {
        match self {
            Ray::Axis => "axis",
            Ray::Diagonal => "diag",
        }
    }
}

/// Kernel values along a ray.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub beta: f64,
    pub t: f64,
    pub dim: usize,
    pub component: KernelComponent,
    pub ray: Ray,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Closed-form comparison values, when available.
    pub reference: Option<Vec<f64>>,
}

impl KernelTable {
    pub fn new(
        beta: f64,
        t: f64,
        dim: usize,
        component: KernelComponent,
        ray: Ray,
        radii: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(FgnsError::param("kernel table needs one value per radius"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|&r| !(r >= 0.0)) {
            return Err(FgnsError::param("kernel table radii must be nonnegative and increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FgnsError::NonFinite("kernel table"));
        }
        Ok(Self {
            beta,
            t,
            dim,
            component,
            ray,
            radii,
            values,
            reference: None,
        })
    }

    /// Label used in the CSV `component` column.
    pub fn label(&self) -> String {
        match self.component {
            KernelComponent::Scalar => format!("heat-{}", self.ray.as_str()),
            KernelComponent::Magnitude => format!("mag-{}", self.ray.as_str()),
            KernelComponent::Tensor(i, j, k) => format!("G{i}{j}{k}-{}", self.ray.as_str()),
        }
    }
}

/// Radial fractional heat kernel at the given radii, measured along the first
/// axis. For `beta = 1` the Gaussian is attached as reference.
pub fn heat_kernel_table(
    beta: f64,
    t: f64,
    radii: &[f64],
    kg: &KernelGrid,
) -> Result<KernelTable> {
    check_time(t)?;
    check_beta(beta)?;
    let n = kg.n_aux;
    let l = kg.box_len;
    let dim = kg.dim;
    let xi: Vec<f64> = (0..n).map(|j| kg.wavevector(j)).collect();
    let xi2: Vec<f64> = xi.iter().map(|x| x * x).collect();
    let transverse: Vec<f64> = if dim == 2 {
        xi2.clone()
    } else {
        let mut v = Vec::with_capacity(n * n);
        for a in &xi2 {
            for b in &xi2 {
                v.push(a + b);
            }
        }
        v
    };
    let norm = l.powi(dim as i32 - 1);
    // reduced symbol along the first axis
    let reduced: Vec<f64> = xi2
        .par_iter()
        .map(|&a| {
            transverse
                .iter()
                .map(|&b| (-t * (a + b).powf(beta)).exp())
                .sum::<f64>()
                / norm
        })
        .collect();
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            reduced
                .iter()
                .zip(&xi)
                .map(|(s, x)| s * (x * r).cos())
                .sum::<f64>()
                / l
        })
        .collect();
    let mut table = KernelTable::new(
        beta,
        t,
        dim,
        KernelComponent::Scalar,
        Ray::Axis,
        radii.to_vec(),
        values,
    )?;
    if beta == 1.0 {
        table.reference = Some(radii.iter().map(|&r| gaussian(t, r, dim)).collect());
    }
    Ok(table)
}

/// `(4 pi t)^{-n/2} e^{-r^2/(4t)}`.
pub fn gaussian(t: f64, r: f64, dim: usize) -> f64 {
    (4.0 * PI * t).powf(-(dim as f64) / 2.0) * (-r * r / (4.0 * t)).exp()
}

/// Heat kernel sampled on every point of the auxiliary grid.
pub fn heat_kernel_grid(beta: f64, t: f64, kg: &KernelGrid) -> Result<(TorusGrid, Vec<f64>)> {
    check_time(t)?;
    check_beta(beta)?;
    let grid = kg.full_grid()?;
    let scale = grid.volume().recip();
    let coeffs: Vec<Complex64> = (0..grid.len())
        .map(|m| {
            let k2 = grid.wavevector_norm2(m);
            Complex64::new((-t * k2.powf(beta)).exp() * scale, 0.0)
        })
        .collect();
    let values = grid.inverse_real(&coeffs);
    Ok((grid, values))
}

/// Riemann sum of the heat kernel over the auxiliary box.
pub fn heat_kernel_mass(beta: f64, t: f64, kg: &KernelGrid) -> Result<f64> {
    let (grid, values) = heat_kernel_grid(beta, t, kg)?;
    Ok(values.iter().sum::<f64>() * grid.cell_volume())
}

/// Unique `(i, j, k)` entries of the Oseen tensor, symmetric in `(i, k)`.
pub fn oseen_components(dim: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for k in i..dim {
            for j in 0..dim {
                out.push((i, j, k));
            }
        }
    }
    out
}

/// Fourier symbol `i xi_j (delta_ik - xi_i xi_k / |xi|^2) e^{-t |xi|^{2 beta}}`
/// with the imaginary unit dropped.
fn oseen_symbol(kd: &[f64; 3], k2: f64, t: f64, beta: f64, (i, j, k): (usize, usize, usize)) -> f64 {
    let kd2: f64 = kd.iter().map(|x| x * x).sum();
    if kd2 == 0.0 {
        return 0.0;
    }
    let delta = if i == k { 1.0 } else { 0.0 };
    kd[j] * (delta - kd[i] * kd[k] / kd2) * (-t * k2.powf(beta)).exp()
}

/// Real-space kernel of `e^{-t(-Delta)^beta} P div` on the auxiliary grid.
#[derive(Clone, Debug)]
pub struct OseenKernel {
    beta: f64,
    t: f64,
    grid: TorusGrid,
    magnitude: Vec<f64>,
    rays: Vec<KernelTable>,
}

fn ray_points(grid: &TorusGrid, ray: Ray) -> Vec<(usize, f64)> {
    let dim = grid.dim();
    let h = grid.spacing();
    let limit = grid.box_len() / 4.0;
    let step = match ray {
        Ray::Axis => h,
        Ray::Diagonal => h * (dim as f64).sqrt(),
    };
    let mut out = Vec::new();
    let mut m = 1usize;
    while m as f64 * step <= limit * (1.0 + 1e-12) {
        let mut idx = [0usize; 3];
        match ray {
            Ray::Axis => idx[0] = m,
            Ray::Diagonal => idx[..dim].iter_mut().for_each(|x| *x = m),
        }
        out.push((grid.flat_index(idx), m as f64 * step));
        m += 1;
    }
    out
}

impl OseenKernel {
    pub fn compute(beta: f64, t: f64, kg: &KernelGrid) -> Result<Self> {
        check_time(t)?;
        check_beta(beta)?;
        let grid = kg.full_grid()?;
        let dim = grid.dim();
        let comps = oseen_components(dim);
        let scale = grid.volume().recip();
        let per_comp: Vec<Vec<f64>> = comps
            .par_iter()
            .map(|&c| {
                let mut buf: Vec<Complex64> = (0..grid.len())
                    .map(|m| {
                        let s = oseen_symbol(
                            &grid.deriv_wavevector(m),
                            grid.wavevector_norm2(m),
                            t,
                            beta,
                            c,
                        );
                        Complex64::new(0.0, s * scale)
                    })
                    .collect();
                grid.inverse(&mut buf);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        let mut mag2 = vec![0.0; grid.len()];
        for (&(i, _, k), vals) in comps.iter().zip(&per_comp) {
            let mult = if i == k { 1.0 } else { 2.0 };
            for (m, v) in mag2.iter_mut().zip(vals) {
                *m += mult * v * v;
            }
        }
        let magnitude: Vec<f64> = mag2.into_iter().map(f64::sqrt).collect();
        let mut rays = Vec::new();
        for ray in [Ray::Axis, Ray::Diagonal] {
            let pts = ray_points(&grid, ray);
            let radii: Vec<f64> = pts.iter().map(|p| p.1).collect();
            rays.push(KernelTable::new(
                beta,
                t,
                dim,
                KernelComponent::Magnitude,
                ray,
                radii.clone(),
                pts.iter().map(|p| magnitude[p.0]).collect(),
            )?);
            for (&c, vals) in comps.iter().zip(&per_comp) {
                rays.push(KernelTable::new(
                    beta,
                    t,
                    dim,
                    KernelComponent::Tensor(c.0, c.1, c.2),
                    ray,
                    radii.clone(),
                    pts.iter().map(|p| vals[p.0]).collect(),
                )?);
            }
        }
        Ok(Self {
            beta,
            t,
            grid,
            magnitude,
            rays,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Frobenius norm at every grid point.
    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn tables(&self) -> &[KernelTable] {
        &self.rays
    }

    pub fn magnitude_table(&self, ray: Ray) -> &KernelTable {
        self.rays
            .iter()
            .find(|t| t.ray == ray && t.component == KernelComponent::Magnitude)
            .expect("magnitude tables are always built")
    }

    /// `max_x |G_t(x)| (t^{1/(2 beta)} + |x|)^{n+1}` over the whole inner half-box.
    pub fn decay_constant(&self) -> f64 {
        let dim = self.grid.dim();
        let s = self.t.powf(1.0 / (2.0 * self.beta));
        let half = self.grid.box_len() / 2.0;
        let limit = self.grid.box_len() / 4.0;
        (0..self.grid.len())
            .map(|m| {
                let x = self.grid.point(m);
                let r2: f64 = x[..dim]
                    .iter()
                    .map(|&c| {
                        let d = if c >= half { c - self.grid.box_len() } else { c };
                        d * d
                    })
                    .sum();
                let r = r2.sqrt();
                if r > limit {
                    0.0
                } else {
                    self.magnitude[m] * (s + r).powi(dim as i32 + 1)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `(sum |G|^r h^n)^{1/r}` over the auxiliary box.
    pub fn lr_norm(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(FgnsError::param(format!("L^r exponent must be >= 1, got {r}")));
        }
        let s: f64 = self.magnitude.iter().map(|v| v.powf(r)).sum();
        Ok((s * self.grid.cell_volume()).powf(1.0 / r))
    }

    /// Weak `L^{r,infinity}` norm via the decreasing rearrangement.
    pub fn weak_lr_norm(&self, r: f64) -> Result<f64> {
        crate::norms::lorentz_norm_values(&self.magnitude, self.grid.cell_volume(), r)
    }
}

/// Oseen tensor entry `(i, j, k)` at an arbitrary point by direct summation
/// over the auxiliary modes.
pub fn oseen_entry_at(
    beta: f64,
    t: f64,
    kg: &KernelGrid,
    entry: (usize, usize, usize),
    x: [f64; 3],
) -> Result<f64> {
    check_time(t)?;
    check_beta(beta)?;
    let n = kg.n_aux;
    let dim = kg.dim;
    let mut xi: Vec<f64> = (0..n).map(|j| kg.wavevector(j)).collect();
    let xi_true = xi.clone();
    xi[n / 2] = 0.0;
    let planes = n.pow(dim as u32 - 1);
    let partial: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut s = 0.0;
            for rest in 0..planes {
                let b = rest / n % n;
                let c = rest % n;
                let (kd, k2) = if dim == 2 {
                    (
                        [xi[a], xi[c], 0.0],
                        xi_true[a].powi(2) + xi_true[c].powi(2),
                    )
                } else {
                    (
                        [xi[a], xi[b], xi[c]],
                        xi_true[a].powi(2) + xi_true[b].powi(2) + xi_true[c].powi(2),
                    )
                };
                let sym = oseen_symbol(&kd, k2, t, beta, entry);
                if sym != 0.0 {
                    let phase: f64 = (0..dim).map(|d| kd[d] * x[d]).sum();
                    s -= sym * phase.sin();
                }
            }
            s
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / kg.box_len.powi(dim as i32))
}

/// `max_r value(r) (t^{1/(2 beta)} + r)^{n+1}` over a table.
pub fn fit_decay_constant(table: &KernelTable, beta: f64, t: f64, dim: usize) -> Result<f64> {
    if table.values.iter().any(|v| !v.is_finite()) {
        return Err(FgnsError::NonFinite("kernel table"));
    }
    let s = t.powf(1.0 / (2.0 * beta));
    Ok(table
        .radii
        .iter()
        .zip(&table.values)
        .map(|(r, v)| v.abs() * (s + r).powi(dim as i32 + 1))
        .fold(0.0, f64::max))
}

/// The exponent `(1/(2 beta)) (n/r - (n+1))` of `t` in `||G_t||_{L^r}`.
pub fn lr_rate(beta: f64, dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    (n / r - (n + 1.0)) / (2.0 * beta)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(FgnsError::param("slope fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(FgnsError::param("slope fit needs positive samples"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
