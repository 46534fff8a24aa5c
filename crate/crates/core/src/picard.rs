//! Picard iteration for the mild and mollified fixed-point problems, the
//! Lorentz-ball iteration and the empirical bilinear constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duhamel::{mollify_trajectory, Duhamel, MollifierSpec, QuadratureRule};
use crate::duhamel::{TimeMesh, TrajectoryField};
use crate::error::{FgnsError, Result};
use crate::initial::random_bandlimited;
use crate::norms::{caloric_extension, default_stride, node_lorentz_norms, x_norm};
use crate::norms::{lorentz_norm, time_lorentz_norm, CarlesonWindowSet};
use crate::quadrature::singular_convolution;
use crate::params::{LorentzParams, ModelParams};
use crate::torus::{SpectralVectorField, TorusGrid, DIVFREE_TOL};

/// Norm used for stopping, ratios and the ball check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    /// `X^beta_{alpha;T}`.
    X,
    /// `L^infinity(0,T; L^{q,infinity})`.
    Lorentz,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardConfig {
    pub horizon: f64,
    pub intervals: usize,
    pub grading: f64,
    pub max_iter: usize,
    /// Relative to the norm of the first iterate.
    pub stop_tol: f64,
    pub norm_mode: NormMode,
    pub model: ModelParams,
    pub lorentz: Option<LorentzParams>,
    pub window_levels: usize,
    /// `None` selects `max(1, N/16)`.
    pub window_stride: Option<usize>,
    pub rule: QuadratureRule,
    /// Empirical bilinear constant used for the smallness indicator.
    pub bilinear_constant: Option<f64>,
    /// Halve the horizon until the smallness indicator drops below one.
    pub bisect_horizon: bool,
}

impl PicardConfig {
    pub fn new(model: ModelParams) -> Self {
        Self {
            horizon: 1.0,
            intervals: 32,
            grading: 2.0,
            max_iter: 20,
            stop_tol: 1e-8,
            norm_mode: NormMode::X,
            model,
            lorentz: None,
            window_levels: 6,
            window_stride: None,
            rule: QuadratureRule::default(),
            bilinear_constant: None,
            bisect_horizon: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(FgnsError::param(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.max_iter == 0 {
            return Err(FgnsError::param("max_iter must be >= 1"));
        }
        if !(self.stop_tol > 0.0) {
            return Err(FgnsError::param("stop_tol must be positive"));
        }
        if self.norm_mode == NormMode::Lorentz && self.lorentz.is_none() {
            return Err(FgnsError::param("Lorentz norm mode needs Lorentz exponents"));
        }
        if let Some(c) = self.bilinear_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(FgnsError::param(format!("bilinear constant must be positive, got {c}")));
            }
        }
        Ok(())
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    pub fn mesh(&self) -> Result<TimeMesh> {
        TimeMesh::graded(self.horizon, self.intervals, self.grading)
    }

    pub fn windows(&self, grid: &TorusGrid) -> Result<CarlesonWindowSet> {
        CarlesonWindowSet::dyadic(
            self.horizon,
            self.model.beta(),
            self.window_levels,
            self.window_stride.unwrap_or_else(|| default_stride(grid)),
        )
    }

    pub fn duhamel(&self) -> Result<Duhamel> {
        Duhamel::new(self.model.beta(), self.rule)
    }

    fn lorentz_q(&self) -> Result<f64> {
        self.lorentz
            .map(|l| l.q())
            .ok_or_else(|| FgnsError::param("Lorentz exponents are not configured"))
    }

    /// Norm of a trajectory in the configured mode.
    pub fn norm(&self, u: &TrajectoryField, windows: &CarlesonWindowSet) -> Result<f64> {
        match self.norm_mode {
            NormMode::X => Ok(x_norm(u, &self.model, windows)?.value),
            NormMode::Lorentz => sup_lorentz(u, self.lorentz_q()?),
        }
    }
}

fn sup_lorentz(u: &TrajectoryField, q: f64) -> Result<f64> {
    Ok(node_lorentz_norms(u, q)?.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardStep {
    pub iter: usize,
    /// `||v_n||`.
    pub norm: f64,
    /// `||v_n - v_{n-1}||`.
    pub diff: f64,
    /// `diff_n / diff_{n-1}`, absent for the first step or a zero predecessor.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PicardTrace {
    pub steps: Vec<PicardStep>,
    pub horizon: f64,
    /// `||v_0||` in the active norm.
    pub initial_norm: f64,
    /// `4 C ||v_0||` (X mode) or `4 T^{1/p} ||u0||_{q,inf}` (Lorentz mode).
    pub indicator: Option<f64>,
    /// The smallness hypothesis held, so contraction is guaranteed.
    pub guaranteed: bool,
    pub converged: bool,
    /// `||v_n|| <= 2 ||v_0||` (or `2 ||u0||_{q,inf}`) held at every iteration.
    pub ball_invariant: bool,
    /// `||u - (v_0 - B(u,u))|| / ||v_0||` after convergence.
    pub residual: Option<f64>,
    /// Worst `||div v_n||_inf / (1 + ||v_n||_inf)` over the iterates.
    pub max_divergence: f64,
}

impl PicardTrace {
    pub fn max_ratio(&self) -> Option<f64> {
        self.steps.iter().filter_map(|s| s.ratio).reduce(f64::max)
    }

    pub fn last_diff(&self) -> Option<f64> {
        self.steps.last().map(|s| s.diff)
    }
}

fn check_initial(u0: &SpectralVectorField) -> Result<()> {
    let d = u0.divergence_defect();
    if d > DIVFREE_TOL {
        return Err(FgnsError::NotDivergenceFree(d));
    }
    Ok(())
}

fn max_divergence(u: &TrajectoryField) -> f64 {
    u.states()
        .iter()
        .map(|s| s.divergence_linf() / (1.0 + s.linf_norm()))
        .fold(0.0, f64::max)
}

/// Runs `v_n = v_0 - op(v_{n-1})` until the relative difference drops below
/// the tolerance.
fn iterate<F, N>(
    e0: &TrajectoryField,
    cfg: &PicardConfig,
    op: F,
    norm: N,
    ball_radius: f64,
    trace: &mut PicardTrace,
) -> Result<TrajectoryField>
where
    F: Fn(&TrajectoryField) -> Result<TrajectoryField>,
    N: Fn(&TrajectoryField) -> Result<f64>,
{
    let scale = trace.initial_norm;
    let ball_tol = 1e-12 * ball_radius.max(f64::MIN_POSITIVE);
    let mut current = e0.clone();
    let mut rising = 0;
    trace.ball_invariant = trace.initial_norm <= ball_radius + ball_tol;
    trace.max_divergence = max_divergence(e0);
    for n in 1..=cfg.max_iter {
        let next = e0.sub(&op(&current)?)?;
        let diff = norm(&next.sub(&current)?)?;
        let value = norm(&next)?;
        if !(diff.is_finite() && value.is_finite()) {
            return Err(FgnsError::NonFinite("Picard iterate"));
        }
        let prev = trace.steps.last().map(|s| s.diff);
        let ratio = prev.and_then(|p| if p > 0.0 { Some(diff / p) } else { None });
        trace.steps.push(PicardStep {
            iter: n,
            norm: value,
            diff,
            ratio,
        });
        if value > ball_radius + ball_tol {
            trace.ball_invariant = false;
        }
        trace.max_divergence = trace.max_divergence.max(max_divergence(&next));
        current = next;
        if diff <= cfg.stop_tol * scale {
            trace.converged = true;
            return Ok(current);
        }
        rising = match prev {
            Some(p) if diff > p => rising + 1,
            _ => 0,
        };
        if rising >= 3 {
            return Err(FgnsError::Diverged(Box::new(trace.clone())));
        }
    }
    Err(FgnsError::NotConverged(Box::new(trace.clone())))
}

/// Smallness indicator `4 C ||e^{-t(-Delta)^beta} u0||_X` on a horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smallness {
    pub indicator: f64,
    pub holds: bool,
    /// Largest `T / 2^k` at which the indicator is below one.
    pub admissible_horizon: Option<f64>,
}

const MAX_HALVINGS: usize = 40;

fn indicator_at(u0: &SpectralVectorField, cfg: &PicardConfig, constant: f64) -> Result<f64> {
    let mesh = cfg.mesh()?;
    let windows = cfg.windows(u0.grid())?;
    let e0 = caloric_extension(u0, &mesh, cfg.model.beta())?;
    Ok(4.0 * constant * x_norm(&e0, &cfg.model, &windows)?.value)
}

pub fn smallness_check(u0: &SpectralVectorField, cfg: &PicardConfig) -> Result<Smallness> {
    let constant = cfg
        .bilinear_constant
        .ok_or_else(|| FgnsError::param("smallness check needs a bilinear constant"))?;
    let indicator = indicator_at(u0, cfg, constant)?;
    let holds = indicator < 1.0;
    let mut admissible_horizon = None;
    let mut t = cfg.horizon;
    let mut ind = indicator;
    for _ in 0..=MAX_HALVINGS {
        if ind < 1.0 {
            admissible_horizon = Some(t);
            break;
        }
        t *= 0.5;
        ind = indicator_at(u0, &cfg.with_horizon(t), constant)?;
    }
    Ok(Smallness {
        indicator,
        holds,
        admissible_horizon,
    })
}

fn prepare(u0: &SpectralVectorField, cfg: &PicardConfig) -> Result<PicardConfig> {
    cfg.validate()?;
    check_initial(u0)?;
    if cfg.bisect_horizon && cfg.bilinear_constant.is_some() {
        let s = smallness_check(u0, cfg)?;
        if let Some(t) = s.admissible_horizon {
            return Ok(cfg.with_horizon(t));
        }
    }
    Ok(cfg.clone())
}

fn start_trace(
    e0: &TrajectoryField,
    cfg: &PicardConfig,
    windows: &CarlesonWindowSet,
) -> Result<PicardTrace> {
    let initial_norm = cfg.norm(e0, windows)?;
    let indicator = match cfg.norm_mode {
        NormMode::X => cfg.bilinear_constant.map(|c| 4.0 * c * initial_norm),
        NormMode::Lorentz => None,
    };
    Ok(PicardTrace {
        horizon: cfg.horizon,
        initial_norm,
        indicator,
        guaranteed: indicator.map_or(false, |i| i < 1.0),
        ..PicardTrace::default()
    })
}

fn relative_residual(
    u: &TrajectoryField,
    e0: &TrajectoryField,
    image: &TrajectoryField,
    cfg: &PicardConfig,
    windows: &CarlesonWindowSet,
    scale: f64,
) -> Result<f64> {
    let r = cfg.norm(&u.sub(&e0.sub(image)?)?, windows)?;
    Ok(if scale > 0.0 { r / scale } else { r })
}

/// Mild solution `u = e^{-t(-Delta)^beta} u0 - B(u, u)`.
pub fn solve_mild(
    u0: &SpectralVectorField,
    cfg: &PicardConfig,
) -> Result<(TrajectoryField, PicardTrace)> {
    let cfg = prepare(u0, cfg)?;
    let mesh = cfg.mesh()?;
    let windows = cfg.windows(u0.grid())?;
    let duhamel = cfg.duhamel()?;
    let e0 = caloric_extension(u0, &mesh, cfg.model.beta())?;
    let mut trace = start_trace(&e0, &cfg, &windows)?;
    let radius = 2.0 * trace.initial_norm;
    let op = |v: &TrajectoryField| duhamel.apply(v, v);
    let norm = |v: &TrajectoryField| cfg.norm(v, &windows);
    let u = iterate(&e0, &cfg, op, norm, radius, &mut trace)?;
    let image = duhamel.apply(&u, &u)?;
    trace.residual = Some(relative_residual(&u, &e0, &image, &cfg, &windows, trace.initial_norm)?);
    Ok((u, trace))
}

/// Mollified solution `u_eps = e^{-t(-Delta)^beta} u0 - B(u_eps * omega_eps, u_eps)`.
pub fn solve_mollified(
    u0: &SpectralVectorField,
    epsilon: f64,
    cfg: &PicardConfig,
) -> Result<(TrajectoryField, PicardTrace)> {
    let cfg = prepare(u0, cfg)?;
    let mollifier = MollifierSpec::new(epsilon)?;
    mollifier.multiplier(u0.grid())?;
    let mesh = cfg.mesh()?;
    let windows = cfg.windows(u0.grid())?;
    let duhamel = cfg.duhamel()?;
    let e0 = caloric_extension(u0, &mesh, cfg.model.beta())?;
    let mut trace = start_trace(&e0, &cfg, &windows)?;
    let radius = 2.0 * trace.initial_norm;
    let op = |v: &TrajectoryField| duhamel.apply_mollified(v, &mollifier);
    let norm = |v: &TrajectoryField| cfg.norm(v, &windows);
    let u = iterate(&e0, &cfg, op, norm, radius, &mut trace)?;
    let image = duhamel.apply_mollified(&u, &mollifier)?;
    trace.residual = Some(relative_residual(&u, &e0, &image, &cfg, &windows, trace.initial_norm)?);
    Ok((u, trace))
}

/// One row of the mollified-vs-mild comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonComparison {
    pub epsilon: f64,
    /// `||u - u_eps||_X`.
    pub lhs: f64,
    /// `||u - u * omega_eps||_X`.
    pub mollifier_gap: f64,
    /// `2 C ||e0|| / (1 - 4 C ||e0||) * mollifier_gap`.
    pub rhs: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<EpsilonComparison>,
    pub indicator: f64,
    pub constant: f64,
    pub mild_trace: PicardTrace,
}

impl ComparisonReport {
    /// `lhs <= slack * rhs` on every row.
    pub fn bound_holds(&self, slack: f64) -> bool {
        self.rows.iter().all(|r| r.lhs <= slack * r.rhs)
    }

    /// `lhs` strictly decreasing along the rows.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].lhs < w[0].lhs)
    }
}

pub fn compare_mollified_to_mild(
    u0: &SpectralVectorField,
    epsilons: &[f64],
    cfg: &PicardConfig,
) -> Result<ComparisonReport> {
    if cfg.norm_mode != NormMode::X {
        return Err(FgnsError::param("the epsilon comparison is stated in the X norm"));
    }
    let constant = cfg
        .bilinear_constant
        .ok_or_else(|| FgnsError::param("the epsilon comparison needs a bilinear constant"))?;
    let (u, mild_trace) = solve_mild(u0, cfg)?;
    let used = cfg.with_horizon(mild_trace.horizon);
    let windows = used.windows(u0.grid())?;
    let indicator = 4.0 * constant * mild_trace.initial_norm;
    if indicator >= 1.0 {
        return Err(FgnsError::SmallnessViolated { indicator });
    }
    let factor = 2.0 * constant * mild_trace.initial_norm / (1.0 - indicator);
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let (ue, tr) = solve_mollified(u0, eps, &used)?;
        let lhs = x_norm(&u.sub(&ue)?, &used.model, &windows)?.value;
        let smoothed = mollify_trajectory(&u, &MollifierSpec::new(eps)?)?;
        let gap = x_norm(&u.sub(&smoothed)?, &used.model, &windows)?.value;
        rows.push(EpsilonComparison {
            epsilon: eps,
            lhs,
            mollifier_gap: gap,
            rhs: factor * gap,
            iterations: tr.steps.len(),
        });
    }
    Ok(ComparisonReport {
        rows,
        indicator,
        constant,
        mild_trace,
    })
}

/// `4 T^{1/p} ||u0||_{q,inf}`.
pub fn lorentz_threshold(u0: &SpectralVectorField, lp: &LorentzParams, horizon: f64) -> Result<f64> {
    let n = lorentz_norm(u0, lp.q())?;
    let tp = if lp.p().is_infinite() { 1.0 } else { horizon.powf(1.0 / lp.p()) };
    Ok(4.0 * tp * n)
}

/// Picard iteration in `L^infinity(0,T; L^{q,infinity})` under
/// `4 T^{1/p} ||u0||_{q,inf} < 1`.
pub fn lorentz_picard(
    u0: &SpectralVectorField,
    lp: &LorentzParams,
    horizon: f64,
    cfg: &PicardConfig,
) -> Result<(TrajectoryField, PicardTrace)> {
    let data_norm = lorentz_norm(u0, lp.q())?;
    let indicator = lorentz_threshold(u0, lp, horizon)?;
    if indicator >= 1.0 {
        let max_horizon = if lp.p().is_infinite() {
            0.0
        } else {
            (1.0 / (4.0 * data_norm)).powf(lp.p())
        };
        return Err(FgnsError::ThresholdViolated {
            indicator,
            max_horizon,
        });
    }
    let cfg = PicardConfig {
        horizon,
        norm_mode: NormMode::Lorentz,
        lorentz: Some(*lp),
        bisect_horizon: false,
        ..cfg.clone()
    };
    cfg.validate()?;
    check_initial(u0)?;
    let mesh = cfg.mesh()?;
    let windows = cfg.windows(u0.grid())?;
    let duhamel = cfg.duhamel()?;
    let e0 = caloric_extension(u0, &mesh, cfg.model.beta())?;
    let mut trace = start_trace(&e0, &cfg, &windows)?;
    trace.indicator = Some(indicator);
    trace.guaranteed = true;
    let op = |v: &TrajectoryField| duhamel.apply(v, v);
    let norm = |v: &TrajectoryField| sup_lorentz(v, lp.q());
    let u = iterate(&e0, &cfg, op, norm, 2.0 * data_norm, &mut trace)?;
    let image = duhamel.apply(&u, &u)?;
    trace.residual = Some(relative_residual(&u, &e0, &image, &cfg, &windows, trace.initial_norm)?);
    Ok((u, trace))
}

/// `||B(u,v)(t)||_{q,inf}` against `int_0^t (t-s)^{-gamma} ||u(s)||_{q,inf} ||v(s)||_{q,inf} ds`
/// at one node, with `gamma = (1 + n/q)/(2 beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeBound {
    pub time: f64,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn pointwise_lorentz_bound(
    duhamel: &Duhamel,
    u: &TrajectoryField,
    v: &TrajectoryField,
    lp: &LorentzParams,
) -> Result<Vec<NodeBound>> {
    let b = duhamel.apply(u, v)?;
    let lhs = node_lorentz_norms(&b, lp.q())?;
    let nu = node_lorentz_norms(u, lp.q())?;
    let nv = node_lorentz_norms(v, lp.q())?;
    let product: Vec<f64> = nu.iter().zip(&nv).map(|(a, b)| a * b).collect();
    let nodes = u.mesh().nodes();
    let gamma = lp.kernel_exponent();
    Ok((0..nodes.len())
        .map(|i| NodeBound {
            time: nodes[i],
            lhs: lhs[i],
            rhs: singular_convolution(nodes, &product, i, gamma),
        })
        .collect())
}

/// Empirical constants of the four space-time Lorentz bilinear bounds:
/// `[pp->p, inf p->inf, inf inf->inf (with T^{1/p}), inf p->p (with T^{1/p})]`.
/// Entries with a vanishing denominator are `None`.
pub fn lorentz_bilinear_ratios(
    duhamel: &Duhamel,
    u: &TrajectoryField,
    v: &TrajectoryField,
    lp: &LorentzParams,
) -> Result<[Option<f64>; 4]> {
    let b = duhamel.apply(u, v)?;
    let mesh = u.mesh();
    let q = lp.q();
    let p = lp.p();
    let series = |w: &TrajectoryField| node_lorentz_norms(w, q);
    let (sb, su, sv) = (series(&b)?, series(u)?, series(v)?);
    let weak = |s: &[f64]| time_lorentz_norm(s, mesh, p);
    let sup = |s: &[f64]| s.iter().fold(0.0, |m: f64, x| m.max(*x));
    let tp = if p.is_infinite() { 1.0 } else { mesh.horizon().powf(1.0 / p) };
    let div = |a: f64, d: f64| if d > 0.0 { Some(a / d) } else { None };
    Ok([
        div(weak(&sb)?, weak(&su)? * weak(&sv)?),
        div(sup(&sb), sup(&su) * weak(&sv)?),
        div(sup(&sb), tp * sup(&su) * sup(&sv)),
        div(weak(&sb)?, tp * sup(&su) * weak(&sv)?),
    ])
}

/// Highest wavenumber of the random sample fields.
const SAMPLE_BAND: i64 = 3;

/// One sampled ratio `||B(u,v)||_X / (||u||_X ||v||_X)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearSample {
    pub index: usize,
    pub ratio: f64,
}

/// Random divergence-free trajectory: either a caloric extension or a fixed
/// field modulated by `(t/T)^a`.
pub fn sample_trajectory(
    grid: &TorusGrid,
    mesh: &TimeMesh,
    beta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TrajectoryField> {
    let seed: u64 = rng.gen();
    let amplitude = rng.gen_range(0.5..2.0);
    let w = random_bandlimited(grid, SAMPLE_BAND, amplitude, seed)?;
    if rng.gen_bool(0.5) {
        caloric_extension(&w, mesh, beta)
    } else {
        let a: f64 = rng.gen_range(0.0..1.0);
        let horizon = mesh.horizon();
        let states = mesh
            .nodes()
            .iter()
            .map(|&t| w.scale((t / horizon).powf(a)))
            .collect();
        TrajectoryField::new(mesh.clone(), states)
    }
}

/// All nondegenerate sample ratios, in sample order.
pub fn bilinear_samples(
    grid: &TorusGrid,
    sample_size: usize,
    cfg: &PicardConfig,
    seed: u64,
) -> Result<Vec<BilinearSample>> {
    if sample_size < 10 {
        return Err(FgnsError::param(format!("sample size must be >= 10, got {sample_size}")));
    }
    let mesh = cfg.mesh()?;
    let windows = cfg.windows(grid)?;
    let duhamel = cfg.duhamel()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for index in 0..sample_size {
        let u = sample_trajectory(grid, &mesh, cfg.model.beta(), &mut rng)?;
        let v = sample_trajectory(grid, &mesh, cfg.model.beta(), &mut rng)?;
        if let Some(ratio) = bilinear_ratio(&duhamel, &u, &v, &cfg.model, &windows)? {
            out.push(BilinearSample { index, ratio });
        }
    }
    Ok(out)
}

/// `||B(u,v)||_X / (||u||_X ||v||_X)`, or `None` when a factor vanishes.
pub fn bilinear_ratio(
    duhamel: &Duhamel,
    u: &TrajectoryField,
    v: &TrajectoryField,
    model: &ModelParams,
    windows: &CarlesonWindowSet,
) -> Result<Option<f64>> {
    let nu = x_norm(u, model, windows)?.value;
    let nv = x_norm(v, model, windows)?.value;
    if nu == 0.0 || nv == 0.0 {
        return Ok(None);
    }
    let b = duhamel.apply(u, v)?;
    Ok(Some(x_norm(&b, model, windows)?.value / (nu * nv)))
}

/// Largest ratio over explicit pairs; pairs with a vanishing factor are skipped.
pub fn max_bilinear_ratio(
    pairs: &[(TrajectoryField, TrajectoryField)],
    cfg: &PicardConfig,
) -> Result<f64> {
    let first = pairs.first().ok_or(FgnsError::EmptySample)?;
    let windows = cfg.windows(first.0.grid())?;
    let duhamel = cfg.duhamel()?;
    let mut best: Option<f64> = None;
    for (u, v) in pairs {
        if let Some(r) = bilinear_ratio(&duhamel, u, v, &cfg.model, &windows)? {
            best = Some(best.map_or(r, |b| b.max(r)));
        }
    }
    best.ok_or(FgnsError::EmptySample)
}

/// Largest sampled ratio `||B(u,v)||_X / (||u||_X ||v||_X)`.
pub fn estimate_bilinear_constant(
    grid: &TorusGrid,
    sample_size: usize,
    cfg: &PicardConfig,
    seed: u64,
) -> Result<f64> {
    bilinear_samples(grid, sample_size, cfg, seed)?
        .iter()
        .map(|s| s.ratio)
        .reduce(f64::max)
        .ok_or(FgnsError::EmptySample)
}
