//! Time meshes, trajectories, the mollifier and the bilinear Duhamel
//! operators `B` and `B_eps`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{FgnsError, Result};
use crate::quadrature::{integrate, phi1, psi};
use crate::torus::{apply_symbol, check_beta, fractional_symbol, projected_flux};
use crate::torus::{SpectralVectorField, TorusGrid};

/// Nodes `0 = t_0 < t_1 < ... < t_K = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeMesh {
    nodes: Vec<f64>,
    grading: f64,
}

impl TimeMesh {
    /// `t_i = T (i/K)^gamma`, clustered near `t = 0` for `gamma > 1`.
    pub fn graded(horizon: f64, intervals: usize, grading: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FgnsError::param(format!("horizon must be positive, got {horizon}")));
        }
        if intervals == 0 {
            return Err(FgnsError::param("time mesh needs at least one interval"));
        }
        if !(grading >= 1.0) {
            return Err(FgnsError::param(format!("grading must be >= 1, got {grading}")));
        }
        let k = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| horizon * (i as f64 / k).powf(grading))
            .collect();
        nodes[intervals] = horizon;
        Ok(Self { nodes, grading })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(FgnsError::param("time mesh must start at 0 and have a positive node"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|t| t.is_finite()) {
            return Err(FgnsError::param("time mesh nodes must be strictly increasing"));
        }
        Ok(Self {
            nodes,
            grading: 1.0,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("nonempty mesh")
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length of the cell `(t_{i-1}, t_i]` owned by node `i`; zero for node 0.
    pub fn cell_length(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.nodes[i] - self.nodes[i - 1]
        }
    }

    pub fn node_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * self.horizon();
        self.nodes
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or(FgnsError::NotANode(t))
    }

    /// Same relative node layout on a new horizon.
    pub fn rescaled(&self, horizon: f64) -> Result<Self> {
        let f = horizon / self.horizon();
        let mut m = Self::from_nodes(self.nodes.iter().map(|t| t * f).collect())?;
        m.grading = self.grading;
        Ok(m)
    }
}

/// A field sampled at every node of a time mesh.
#[derive(Clone, Debug)]
pub struct TrajectoryField {
    mesh: TimeMesh,
    states: Vec<SpectralVectorField>,
}

impl TrajectoryField {
    pub fn new(mesh: TimeMesh, states: Vec<SpectralVectorField>) -> Result<Self> {
        if states.len() != mesh.len() {
            return Err(FgnsError::param(format!(
                "trajectory needs one state per node ({} nodes, {} states)",
                mesh.len(),
                states.len()
            )));
        }
        let grid = states[0].grid().clone();
        if states.iter().any(|s| *s.grid() != grid) {
            return Err(FgnsError::GridMismatch);
        }
        Ok(Self { mesh, states })
    }

    pub fn zeros(grid: &TorusGrid, mesh: &TimeMesh) -> Self {
        Self {
            mesh: mesh.clone(),
            states: vec![SpectralVectorField::zeros(grid); mesh.len()],
        }
    }

    /// The constant trajectory `u(t) = u0`.
    pub fn constant(u0: &SpectralVectorField, mesh: &TimeMesh) -> Self {
        Self {
            mesh: mesh.clone(),
            states: vec![u0.clone(); mesh.len()],
        }
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn grid(&self) -> &TorusGrid {
        self.states[0].grid()
    }

    pub fn states(&self) -> &[SpectralVectorField] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &SpectralVectorField {
        &self.states[i]
    }

    pub fn into_states(self) -> Vec<SpectralVectorField> {
        self.states
    }

    pub fn is_divergence_free(&self) -> bool {
        self.states.iter().all(|s| s.is_divergence_free())
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.mesh != other.mesh {
            return Err(FgnsError::MeshMismatch);
        }
        if self.grid() != other.grid() {
            return Err(FgnsError::GridMismatch);
        }
        Ok(())
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(&SpectralVectorField) -> SpectralVectorField,
    {
        Self {
            mesh: self.mesh.clone(),
            states: self.states.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|s| s.scale(a))
    }

    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let states = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(x, y)| x.lin_comb(a, y, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mesh: self.mesh.clone(),
            states,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Coefficients at time `s` by linear interpolation between nodes.
    pub fn interpolate(&self, s: f64) -> Vec<Vec<Complex64>> {
        let nodes = self.mesh.nodes();
        let s = s.clamp(0.0, self.mesh.horizon());
        let hi = nodes.partition_point(|&t| t < s).clamp(1, nodes.len() - 1);
        let lo = hi - 1;
        let theta = (s - nodes[lo]) / (nodes[hi] - nodes[lo]);
        let a = self.states[lo].components();
        let b = self.states[hi].components();
        if theta == 0.0 {
            return a.to_vec();
        }
        if theta == 1.0 {
            return b.to_vec();
        }
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .map(|(p, q)| p * (1.0 - theta) + q * theta)
                    .collect()
            })
            .collect()
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.max_coeff_diff(b))
            .fold(0.0, f64::max)
    }
}

/// The bump `omega(x) = c exp(-1/(1-|x|^2))` on the unit ball, rescaled to
/// `omega_eps(x) = eps^{-n} omega(x/eps)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierSpec {
    epsilon: f64,
}

/// Unnormalized bump profile.
pub fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

const RADIAL_PANELS: usize = 16;
const RADIAL_ORDER: usize = 24;

/// `int_{|x|<1} bump(|x|) dx` in dimension `dim`.
pub fn bump_mass(dim: usize) -> f64 {
    let sphere = match dim {
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    };
    sphere * integrate(|r| bump(r) * r.powi(dim as i32 - 1), 0.0, 1.0, RADIAL_PANELS, RADIAL_ORDER)
}

/// `J_0(z) = (1/pi) int_0^pi cos(z sin th) d th` by the periodic trapezoid rule.
pub(crate) fn bessel_j0(z: f64) -> f64 {
    const M: usize = 128;
    let mut s = 0.0;
    for j in 0..M {
        let th = PI * (j as f64 + 0.5) / M as f64;
        s += (z * th.sin()).cos();
    }
    s / M as f64
}

impl MollifierSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(FgnsError::param(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `omega_eps(x)` for `|x| = r`.
    pub fn density(&self, r: f64, dim: usize) -> f64 {
        bump(r / self.epsilon) / (bump_mass(dim) * self.epsilon.powi(dim as i32))
    }

    /// Fourier transform `hat omega(rho)` of the unit-scale normalized profile at
    /// radial frequency `rho`.
    pub fn profile_transform(rho: f64, dim: usize, mass: f64) -> f64 {
        if rho == 0.0 {
            return 1.0;
        }
        let integral = match dim {
            2 => {
                2.0 * PI
                    * integrate(
                        |r| bump(r) * bessel_j0(rho * r) * r,
                        0.0,
                        1.0,
                        RADIAL_PANELS,
                        RADIAL_ORDER,
                    )
            }
            _ => {
                4.0 * PI
                    * integrate(
                        |r| {
                            let x = rho * r;
                            bump(r) * x.sin() / rho * r
                        },
                        0.0,
                        1.0,
                        RADIAL_PANELS,
                        RADIAL_ORDER,
                    )
            }
        };
        integral / mass
    }

    /// Multiplier `hat omega(eps xi)` on every mode of the grid.
    pub fn multiplier(&self, grid: &TorusGrid) -> Result<Vec<f64>> {
        let limit = grid.box_len() / 4.0;
        if !(self.epsilon < limit) {
            return Err(FgnsError::MollifierTooLarge {
                epsilon: self.epsilon,
                limit,
            });
        }
        let dim = grid.dim();
        let mass = bump_mass(dim);
        let mut cache: HashMap<i64, f64> = HashMap::new();
        Ok((0..grid.len())
            .map(|m| {
                let key = grid.wavenumber_norm2(m);
                *cache.entry(key).or_insert_with(|| {
                    let rho = self.epsilon * grid.wavevector_norm2(m).sqrt();
                    Self::profile_transform(rho, dim, mass)
                })
            })
            .collect())
    }
}

/// `u * omega_eps` by spectral multiplication.
pub fn mollify(u: &SpectralVectorField, m: &MollifierSpec) -> Result<SpectralVectorField> {
    let symbol = m.multiplier(u.grid())?;
    Ok(apply_symbol(u, &symbol))
}

/// Mollifies every state of a trajectory.
pub fn mollify_trajectory(u: &TrajectoryField, m: &MollifierSpec) -> Result<TrajectoryField> {
    let symbol = m.multiplier(u.grid())?;
    Ok(u.map(|s| apply_symbol(s, &symbol)))
}

/// Graded product rule on `(0, t)`: sub-nodes `s_j = t (1 - (1 - j/M)^gamma)`,
/// clustered toward `s = t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRule {
    pub gamma: f64,
    pub panels: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            panels: 32,
        }
    }
}

impl QuadratureRule {
    pub fn new(gamma: f64, panels: usize) -> Result<Self> {
        if !(gamma >= 1.0) || panels == 0 {
            return Err(FgnsError::param(format!(
                "quadrature needs gamma >= 1 and at least one panel (gamma = {gamma}, M = {panels})"
            )));
        }
        Ok(Self { gamma, panels })
    }

    pub fn subnodes(&self, t: f64) -> Vec<f64> {
        let m = self.panels as f64;
        let mut s: Vec<f64> = (0..=self.panels)
            .map(|j| t * (1.0 - (1.0 - j as f64 / m).powf(self.gamma)))
            .collect();
        s[self.panels] = t;
        s
    }
}

/// `B(u, v)(t) = int_0^t e^{-(t-s)(-Delta)^beta} P div(u (x) v)(s) ds`.
///
/// The first argument is the advecting velocity: `div(u (x) v)_i = sum_j d_j(u_j v_i)`.
/// The integrand is interpolated linearly in `s` between sub-nodes and the
/// semigroup factor is integrated exactly against it, so constant-in-time
/// inputs are integrated without quadrature error.
#[derive(Clone, Copy, Debug)]
pub struct Duhamel {
    beta: f64,
    rule: QuadratureRule,
}

impl Duhamel {
    pub fn new(beta: f64, rule: QuadratureRule) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta, rule })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// `B(u, v)` at the mesh node with index `node`.
    pub fn apply_at(
        &self,
        u: &TrajectoryField,
        v: &TrajectoryField,
        node: usize,
    ) -> Result<SpectralVectorField> {
        u.check_compatible(v)?;
        if node >= u.mesh().len() {
            return Err(FgnsError::param(format!("node index {node} out of range")));
        }
        let symbol = fractional_symbol(u.grid(), self.beta);
        Ok(self.eval_node(u, v, node, &symbol, std::ptr::eq(u, v)))
    }

    /// `B(u, v)` at the node located at time `t`.
    pub fn apply_at_time(
        &self,
        u: &TrajectoryField,
        v: &TrajectoryField,
        t: f64,
    ) -> Result<SpectralVectorField> {
        let node = u.mesh().node_index(t)?;
        self.apply_at(u, v, node)
    }

    /// `B(u, v)` at every node.
    pub fn apply(&self, u: &TrajectoryField, v: &TrajectoryField) -> Result<TrajectoryField> {
        u.check_compatible(v)?;
        let symbol = fractional_symbol(u.grid(), self.beta);
        let same = std::ptr::eq(u, v);
        let states: Vec<SpectralVectorField> = (0..u.mesh().len())
            .into_par_iter()
            .map(|i| self.eval_node(u, v, i, &symbol, same))
            .collect();
        TrajectoryField::new(u.mesh().clone(), states)
    }

    /// `B_eps(u, u) = B(u * omega_eps, u)` at the node with index `node`.
    pub fn apply_mollified_at(
        &self,
        u: &TrajectoryField,
        m: &MollifierSpec,
        node: usize,
    ) -> Result<SpectralVectorField> {
        let um = mollify_trajectory(u, m)?;
        self.apply_at(&um, u, node)
    }

    /// `B_eps(u, u)` at every node.
    pub fn apply_mollified(
        &self,
        u: &TrajectoryField,
        m: &MollifierSpec,
    ) -> Result<TrajectoryField> {
        let um = mollify_trajectory(u, m)?;
        self.apply(&um, u)
    }

    fn eval_node(
        &self,
        u: &TrajectoryField,
        v: &TrajectoryField,
        node: usize,
        symbol: &[f64],
        same: bool,
    ) -> SpectralVectorField {
        let grid = u.grid();
        let dim = grid.dim();
        let t = u.mesh().nodes()[node];
        let mut acc = vec![vec![Complex64::default(); grid.len()]; dim];
        if node == 0 {
            return SpectralVectorField::from_parts(grid, acc, true);
        }
        let sub = self.rule.subnodes(t);
        let flux_at = |s: f64| {
            let a = u.interpolate(s);
            if same {
                projected_flux(grid, &a, &a, true)
            } else {
                let b = v.interpolate(s);
                projected_flux(grid, &a, &b, false)
            }
        };
        let mut right = flux_at(sub[0]);
        for j in 0..self.rule.panels {
            let left = right;
            right = flux_at(sub[j + 1]);
            let h = sub[j + 1] - sub[j];
            let tau = t - sub[j + 1];
            for (m, &a) in symbol.iter().enumerate() {
                let z = a * h;
                let decay = if tau == 0.0 { 1.0 } else { (-a * tau).exp() };
                let p = psi(z);
                let wl = h * decay * p;
                let wr = h * decay * (phi1(z) - p);
                for c in 0..dim {
                    acc[c][m] += left[c][m] * wl + right[c][m] * wr;
                }
            }
        }
        SpectralVectorField::from_parts(grid, acc, true)
    }
}
