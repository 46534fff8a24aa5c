//! Carleson-type, X-type, Lorentz and caloric Besov norms of fields and
//! trajectories.

use rayon::prelude::*;

use crate::duhamel::{TimeMesh, TrajectoryField};
use crate::error::{FgnsError, Result};
use crate::params::{LorentzParams, ModelParams};
use crate::quadrature::power_weighted_hat_weights;
use crate::torus::{fractional_semigroup, SpectralVectorField, TorusGrid};

/// Relative slack allowed when a window reaches exactly the horizon.
const HORIZON_SLACK: f64 = 1e-12;

/// Dyadic radii `r_j = r_max 2^{-j}` and centers on a strided sub-lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonWindowSet {
    radii: Vec<f64>,
    stride: usize,
    horizon: f64,
    beta: f64,
}

impl CarlesonWindowSet {
    pub fn new(radii: Vec<f64>, stride: usize, horizon: f64, beta: f64) -> Result<Self> {
        if stride == 0 {
            return Err(FgnsError::param("window stride must be >= 1"));
        }
        if radii.is_empty() {
            return Err(FgnsError::param("window set needs at least one radius"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FgnsError::param(format!("horizon must be positive, got {horizon}")));
        }
        for &r in &radii {
            if !(r > 0.0 && r.is_finite()) {
                return Err(FgnsError::param(format!("window radius must be positive, got {r}")));
            }
            let w = r.powf(2.0 * beta);
            if w > horizon * (1.0 + HORIZON_SLACK) {
                return Err(FgnsError::WindowBeyondHorizon {
                    radius: r,
                    window_time: w,
                    horizon,
                });
            }
        }
        Ok(Self {
            radii,
            stride,
            horizon,
            beta,
        })
    }

    /// `r_max = T^{1/(2 beta)}` halved `levels` times.
    pub fn dyadic(horizon: f64, beta: f64, levels: usize, stride: usize) -> Result<Self> {
        let r_max = horizon.powf(1.0 / (2.0 * beta));
        let radii = (0..=levels).map(|j| r_max * 0.5f64.powi(j as i32)).collect();
        Self::new(radii, stride, horizon, beta)
    }

    /// Six halvings and stride `max(1, N/16)`.
    pub fn default_for(grid: &TorusGrid, horizon: f64, beta: f64) -> Result<Self> {
        Self::dyadic(horizon, beta, 6, default_stride(grid))
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_stride(&self, stride: usize) -> Result<Self> {
        Self::new(self.radii.clone(), stride, self.horizon, self.beta)
    }

    /// Windows for data rescaled as `u0(lambda x)`: radii `r / lambda`, horizon
    /// `T / lambda^{2 beta}`.
    pub fn rescaled(&self, lambda: f64, stride: usize) -> Result<Self> {
        Self::new(
            self.radii.iter().map(|r| r / lambda).collect(),
            stride,
            self.horizon / lambda.powf(2.0 * self.beta),
            self.beta,
        )
    }

    /// Flat indices of the window centers.
    pub fn centers(&self, grid: &TorusGrid) -> Vec<usize> {
        (0..grid.len())
            .filter(|&m| {
                grid.multi_index(m)[..grid.dim()]
                    .iter()
                    .all(|i| i % self.stride == 0)
            })
            .collect()
    }
}

pub fn default_stride(grid: &TorusGrid) -> usize {
    (grid.n() / 16).max(1)
}

/// A norm value with the window or time at which it is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub name: String,
    pub value: f64,
    pub radius: Option<f64>,
    pub center: Option<usize>,
    pub time: Option<f64>,
    /// Named summands, e.g. the sup and Carleson parts of the X-norm.
    pub parts: Vec<(String, f64)>,
}

impl NormReport {
    fn named(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            radius: None,
            center: None,
            time: None,
            parts: Vec::new(),
        }
    }

    pub fn part(&self, name: &str) -> Option<f64> {
        self.parts.iter().find(|p| p.0 == name).map(|p| p.1)
    }
}

/// Nodewise `e^{-t(-Delta)^beta} u0`.
pub fn caloric_extension(
    u0: &SpectralVectorField,
    mesh: &TimeMesh,
    beta: f64,
) -> Result<TrajectoryField> {
    let states = mesh
        .nodes()
        .par_iter()
        .map(|&t| fractional_semigroup(u0, t, beta))
        .collect::<Result<Vec<_>>>()?;
    TrajectoryField::new(mesh.clone(), states)
}

/// Cell weights (fraction of a cell inside the ball times the cell volume).
fn ball_stencil(grid: &TorusGrid, r: f64) -> Result<Vec<([i64; 3], f64)>> {
    let dim = grid.dim();
    let h = grid.spacing();
    let vol = grid.cell_volume();
    let reach = (r / h + 0.5).ceil() as i64;
    if 2 * reach + 1 > grid.n() as i64 {
        return Err(FgnsError::param(format!(
            "window radius {r} does not fit in the box of side {}",
            grid.box_len()
        )));
    }
    if r <= 0.5 * h {
        // the ball lies inside the center cell
        let exact = match dim {
            2 => std::f64::consts::PI * r * r,
            _ => 4.0 / 3.0 * std::f64::consts::PI * r.powi(3),
        };
        return Ok(vec![([0; 3], exact)]);
    }
    let sub: usize = if dim == 2 { 16 } else { 8 };
    let total = sub.pow(dim as u32) as f64;
    let range: Vec<i64> = (-reach..=reach).collect();
    let z: Vec<i64> = vec![0];
    let third = if dim == 3 { &range } else { &z };
    let mut out = Vec::new();
    for &a in &range {
        for &b in &range {
            for &c in third {
                let o = [a, b, c];
                let (mut near, mut far) = (0.0, 0.0);
                for &oi in &o[..dim] {
                    let d = oi.abs() as f64 * h;
                    near += (d - 0.5 * h).max(0.0).powi(2);
                    far += (d + 0.5 * h).powi(2);
                }
                if near >= r * r {
                    continue;
                }
                if far <= r * r {
                    out.push((o, vol));
                    continue;
                }
                let mut inside = 0usize;
                let step = h / sub as f64;
                let offs: Vec<f64> = (0..sub)
                    .map(|s| -0.5 * h + (s as f64 + 0.5) * step)
                    .collect();
                let ax = |i: usize| o[i] as f64 * h;
                if dim == 2 {
                    for &p in &offs {
                        for &q in &offs {
                            let x = ax(0) + p;
                            let y = ax(1) + q;
                            if x * x + y * y < r * r {
                                inside += 1;
                            }
                        }
                    }
                } else {
                    for &p in &offs {
                        for &q in &offs {
                            for &s in &offs {
                                let x = ax(0) + p;
                                let y = ax(1) + q;
                                let w = ax(2) + s;
                                if x * x + y * y + w * w < r * r {
                                    inside += 1;
                                }
                            }
                        }
                    }
                }
                if inside > 0 {
                    out.push((o, vol * inside as f64 / total));
                }
            }
        }
    }
    Ok(out)
}

/// Window attaining the largest Carleson integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlesonMax {
    /// The norm, i.e. the square root of the largest weighted integral.
    pub value: f64,
    pub radius: f64,
    pub center: usize,
}

/// `sup_{r, x0} r^{2 alpha - n + 2 beta - 2} int_0^{r^{2 beta}} int_{B(x0, r)} |g|^2 dy dt / t^{alpha/beta}`,
/// square-rooted. `mag2[i]` holds `|g(t_i, .)|^2` on the grid.
pub fn carleson_scan(
    grid: &TorusGrid,
    nodes: &[f64],
    mag2: &[Vec<f64>],
    params: &ModelParams,
    windows: &CarlesonWindowSet,
) -> Result<CarlesonMax> {
    let horizon = *nodes.last().ok_or(FgnsError::param("empty time mesh"))?;
    if windows.beta() != params.beta() {
        return Err(FgnsError::param("window set and model use different beta"));
    }
    let weight_exp = params.time_weight_exponent();
    let centers = windows.centers(grid);
    let mut best = CarlesonMax {
        value: 0.0,
        radius: windows.radii()[0],
        center: centers[0],
    };
    let mut best_sq = 0.0;
    for &r in windows.radii() {
        let w = r.powf(2.0 * params.beta());
        if w > horizon * (1.0 + HORIZON_SLACK) {
            return Err(FgnsError::WindowBeyondHorizon {
                radius: r,
                window_time: w,
                horizon,
            });
        }
        let weights = power_weighted_hat_weights(nodes, w.min(horizon), weight_exp);
        let mut time_int = vec![0.0; grid.len()];
        for (wi, m) in weights.iter().zip(mag2) {
            if *wi == 0.0 {
                continue;
            }
            for (a, b) in time_int.iter_mut().zip(m) {
                *a += wi * b;
            }
        }
        let stencil = ball_stencil(grid, r)?;
        let scale = r.powf(params.carleson_exponent());
        let sums: Vec<f64> = centers
            .par_iter()
            .map(|&c| {
                let idx = grid.multi_index(c);
                stencil
                    .iter()
                    .map(|(o, wt)| wt * time_int[grid.wrapped_index(idx, *o)])
                    .sum::<f64>()
                    * scale
            })
            .collect();
        for (&c, &s) in centers.iter().zip(&sums) {
            if s > best_sq {
                best_sq = s;
                best = CarlesonMax {
                    value: 0.0,
                    radius: r,
                    center: c,
                };
            }
        }
    }
    best.value = best_sq.sqrt();
    Ok(best)
}

fn check_horizon(mesh: &TimeMesh, windows: &CarlesonWindowSet) -> Result<()> {
    let horizon = mesh.horizon();
    for &r in windows.radii() {
        let w = r.powf(2.0 * windows.beta());
        if w > horizon * (1.0 + HORIZON_SLACK) {
            return Err(FgnsError::WindowBeyondHorizon {
                radius: r,
                window_time: w,
                horizon,
            });
        }
    }
    Ok(())
}

/// Carleson norm of the caloric extension of `u0` over `mesh`.
pub fn q_norm_loc(
    u0: &SpectralVectorField,
    params: &ModelParams,
    windows: &CarlesonWindowSet,
    mesh: &TimeMesh,
) -> Result<NormReport> {
    check_horizon(mesh, windows)?;
    let traj = caloric_extension(u0, mesh, params.beta())?;
    let m = carleson_of(&traj, params, windows)?;
    Ok(NormReport {
        name: "q_norm_loc".into(),
        value: m.value,
        radius: Some(m.radius),
        center: Some(m.center),
        time: None,
        parts: Vec::new(),
    })
}

/// Carleson term of a trajectory.
pub fn carleson_of(
    g: &TrajectoryField,
    params: &ModelParams,
    windows: &CarlesonWindowSet,
) -> Result<CarlesonMax> {
    check_horizon(g.mesh(), windows)?;
    let mag2: Vec<Vec<f64>> = g.states().par_iter().map(|s| s.magnitude_squared()).collect();
    carleson_scan(g.grid(), g.mesh().nodes(), &mag2, params, windows)
}

/// `sup_t t^{1 - 1/(2 beta)} ||g(t)||_inf` plus the Carleson term.
pub fn x_norm(
    g: &TrajectoryField,
    params: &ModelParams,
    windows: &CarlesonWindowSet,
) -> Result<NormReport> {
    if g.mesh().len() < 2 {
        return Err(FgnsError::param("x_norm needs a mesh with a positive node"));
    }
    let e = params.sup_weight_exponent();
    let nodes = g.mesh().nodes();
    let weighted: Vec<f64> = g
        .states()
        .par_iter()
        .zip(nodes.par_iter())
        .map(|(s, &t)| if t == 0.0 { 0.0 } else { t.powf(e) * s.linf_norm() })
        .collect();
    let (mut sup, mut at) = (0.0, nodes[1]);
    for (&v, &t) in weighted.iter().zip(nodes) {
        if v > sup {
            sup = v;
            at = t;
        }
    }
    let c = carleson_of(g, params, windows)?;
    let value = sup + c.value;
    if !value.is_finite() {
        return Err(FgnsError::NonFinite("x_norm"));
    }
    Ok(NormReport {
        name: "x_norm".into(),
        value,
        radius: Some(c.radius),
        center: Some(c.center),
        time: Some(at),
        parts: vec![("sup".into(), sup), ("carleson".into(), c.value)],
    })
}

const MAX_DOUBLE_INTEGRAL_N: usize = 32;

/// `sup_I l(I)^{2(alpha+beta-1)-n} int_I int_I |f(x)-f(y)|^2 / |x-y|^{n+2(alpha-beta+1)}`
/// over dyadic grid-aligned cubes, square-rooted. Diagonal cell pairs are skipped.
pub fn q_seminorm_double_integral(
    f: &[f64],
    grid: &TorusGrid,
    params: &ModelParams,
) -> Result<NormReport> {
    if grid.n() > MAX_DOUBLE_INTEGRAL_N {
        return Err(FgnsError::GridTooLarge(grid.len()));
    }
    if f.len() != grid.len() {
        return Err(FgnsError::GridMismatch);
    }
    let dim = grid.dim();
    let n = grid.n();
    let h = grid.spacing();
    let a = params.alpha();
    let b = params.beta();
    let singular = dim as f64 + 2.0 * (a - b + 1.0);
    let side_exp = 2.0 * (a + b - 1.0) - dim as f64;
    let cell2 = grid.cell_volume().powi(2);
    let mut best = 0.0;
    let mut best_side = 0.0;
    let mut best_corner = 0;
    let mut cells = n / 2;
    while cells >= 2 {
        let side = cells as f64 * h;
        let per_axis = n / cells;
        let corners: Vec<[usize; 3]> = (0..per_axis.pow(dim as u32))
            .map(|c| {
                let mut idx = [0usize; 3];
                let mut rem = c;
                for a in (0..dim).rev() {
                    idx[a] = (rem % per_axis) * cells;
                    rem /= per_axis;
                }
                idx
            })
            .collect();
        let members: Vec<[usize; 3]> = (0..cells.pow(dim as u32))
            .map(|c| {
                let mut idx = [0usize; 3];
                let mut rem = c;
                for a in (0..dim).rev() {
                    idx[a] = rem % cells;
                    rem /= cells;
                }
                idx
            })
            .collect();
        let values: Vec<f64> = corners
            .par_iter()
            .map(|corner| {
                let pts: Vec<(usize, [usize; 3])> = members
                    .iter()
                    .map(|m| {
                        let mut g = [0usize; 3];
                        for a in 0..dim {
                            g[a] = corner[a] + m[a];
                        }
                        (grid.flat_index(g), *m)
                    })
                    .collect();
                let mut s = 0.0;
                for (i, (fi, mi)) in pts.iter().enumerate() {
                    for (fj, mj) in &pts[i + 1..] {
                        let d2: f64 = (0..dim)
                            .map(|a| ((mi[a] as f64 - mj[a] as f64) * h).powi(2))
                            .sum();
                        let diff = f[*fi] - f[*fj];
                        s += diff * diff / d2.powf(0.5 * singular);
                    }
                }
                2.0 * s * cell2 * side.powf(side_exp)
            })
            .collect();
        for (c, &v) in corners.iter().zip(&values) {
            if v > best {
                best = v;
                best_side = side;
                best_corner = grid.flat_index(*c);
            }
        }
        cells /= 2;
    }
    Ok(NormReport {
        name: "q_seminorm".into(),
        value: best.sqrt(),
        radius: Some(best_side),
        center: Some(best_corner),
        time: None,
        parts: Vec::new(),
    })
}

/// `max_k v_(k) (k dV)^{1/q}` over the decreasing rearrangement; `max v` for
/// `q = infinity`.
pub fn lorentz_norm_values(values: &[f64], cell_volume: f64, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(FgnsError::param(format!("Lorentz exponent must exceed 1, got {q}")));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    let inv = 1.0 / q;
    Ok(v.iter()
        .enumerate()
        .map(|(k, x)| x * ((k + 1) as f64 * cell_volume).powf(inv))
        .fold(0.0, f64::max))
}

/// Weak `L^q` norm of the pointwise Euclidean magnitude.
pub fn lorentz_norm(u: &SpectralVectorField, q: f64) -> Result<f64> {
    lorentz_norm_values(&u.magnitude(), u.grid().cell_volume(), q)
}

/// Weak `L^p(0, T)` norm of a node series; node `i >= 1` holds its value on
/// `(t_{i-1}, t_i]`. For `p = infinity` every node counts.
pub fn time_lorentz_norm(series: &[f64], mesh: &TimeMesh, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(FgnsError::param(format!("Lorentz exponent must exceed 1, got {p}")));
    }
    if series.len() != mesh.len() {
        return Err(FgnsError::MeshMismatch);
    }
    if p.is_infinite() {
        return Ok(series.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let mut cells: Vec<(f64, f64)> = (1..series.len())
        .map(|i| (series[i].abs(), mesh.cell_length(i)))
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let inv = 1.0 / p;
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for (v, len) in cells {
        acc += len;
        best = best.max(v * acc.powf(inv));
    }
    Ok(best)
}

/// `||u(t_i)||_{L^{q,inf}}` at every node.
pub fn node_lorentz_norms(u: &TrajectoryField, q: f64) -> Result<Vec<f64>> {
    u.states().par_iter().map(|s| lorentz_norm(s, q)).collect()
}

/// `L^p_weak(0,T; L^{q,inf})` norm of a trajectory.
pub fn trajectory_lorentz_norm(u: &TrajectoryField, p: f64, q: f64) -> Result<f64> {
    time_lorentz_norm(&node_lorentz_norms(u, q)?, u.mesh(), p)
}

/// Nodewise split of a trajectory at level `lambda`.
#[derive(Clone, Debug)]
pub struct LevelSplit {
    pub lambda: f64,
    /// Nodes where `||u(t)||_{L^{q,inf}} > lambda`, zero elsewhere.
    pub above: TrajectoryField,
    pub below: TrajectoryField,
    /// `lambda^p |{t : ||u(t)|| > lambda}|`.
    pub measure: f64,
    pub node_norms: Vec<f64>,
}

pub fn level_split(u: &TrajectoryField, lambda: f64, p: f64, q: f64) -> Result<LevelSplit> {
    if !(lambda > 0.0) {
        return Err(FgnsError::param(format!("level must be positive, got {lambda}")));
    }
    let norms = node_lorentz_norms(u, q)?;
    let zero = SpectralVectorField::zeros(u.grid());
    let mut above = Vec::with_capacity(norms.len());
    let mut below = Vec::with_capacity(norms.len());
    let mut measure = 0.0;
    for (i, (s, &nv)) in u.states().iter().zip(&norms).enumerate() {
        if nv > lambda {
            above.push(s.clone());
            below.push(zero.clone());
            measure += u.mesh().cell_length(i);
        } else {
            above.push(zero.clone());
            below.push(s.clone());
        }
    }
    let weight = if p.is_infinite() { 1.0 } else { lambda.powf(p) };
    Ok(LevelSplit {
        lambda,
        above: TrajectoryField::new(u.mesh().clone(), above)?,
        below: TrajectoryField::new(u.mesh().clone(), below)?,
        measure: weight * measure,
        node_norms: norms,
    })
}

/// Smallest positive node must resolve the `t -> 0` limit.
const BESOV_MIN_NODE: f64 = 1e-3;

/// Caloric Besov norm with its small-time tail.
#[derive(Clone, Debug, PartialEq)]
pub struct BesovReport {
    pub report: NormReport,
    /// `(t, t^{alpha/(2 beta)} ||e^{-t(-Delta)^beta} u0||_{q,inf})` at the three smallest positive nodes.
    pub tail: Vec<(f64, f64)>,
}

/// `sup_{0<t<1} t^{alpha/(2 beta)} ||e^{-t(-Delta)^beta} u0||_{L^{q,inf}}` over the nodes.
pub fn besov_norm(
    u0: &SpectralVectorField,
    alpha: f64,
    beta: f64,
    q: f64,
    mesh: &TimeMesh,
) -> Result<BesovReport> {
    if !(alpha > 0.0) {
        return Err(FgnsError::param(format!("alpha must be positive, got {alpha}")));
    }
    let first = mesh.nodes()[1];
    if first > BESOV_MIN_NODE {
        return Err(FgnsError::MeshTooCoarse(first));
    }
    let times: Vec<f64> = mesh
        .nodes()
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < 1.0)
        .collect();
    let vals = times
        .par_iter()
        .map(|&t| {
            let s = fractional_semigroup(u0, t, beta)?;
            Ok(t.powf(alpha / (2.0 * beta)) * lorentz_norm(&s, q)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut report = NormReport::named("besov", 0.0);
    for (&t, &v) in times.iter().zip(&vals) {
        if v > report.value {
            report.value = v;
            report.time = Some(t);
        }
    }
    let tail = times.iter().copied().zip(vals.iter().copied()).take(3).collect();
    Ok(BesovReport { report, tail })
}

/// `t^{1/p} ||u(t)||_{L^{q,inf}}` along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayProfile {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
    /// Values at the three smallest positive nodes.
    pub smallest: Vec<f64>,
}

pub fn decay_profile(u: &TrajectoryField, lp: &LorentzParams) -> Result<DecayProfile> {
    let norms = node_lorentz_norms(u, lp.q())?;
    let inv_p = if lp.p().is_infinite() { 0.0 } else { 1.0 / lp.p() };
    let times = u.mesh().nodes().to_vec();
    let values: Vec<f64> = times
        .iter()
        .zip(&norms)
        .map(|(&t, &n)| if t == 0.0 && inv_p > 0.0 { 0.0 } else { t.powf(inv_p) * n })
        .collect();
    let sup = values.iter().fold(0.0, |m: f64, v| m.max(*v));
    let smallest = values.iter().skip(1).take(3).copied().collect();
    Ok(DecayProfile {
        times,
        values,
        sup,
        smallest,
    })
}
