//! Experiment drivers behind the command-line subcommands. Every run writes
//! deterministic CSV files, snapshots and a `manifest.txt`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::duhamel::TrajectoryField;
use crate::error::{FgnsError, Result};
use crate::initial::generate_initial_data;
use crate::kernels::{fit_decay_constant, heat_kernel_table, KernelTable, OseenKernel, Ray};
use crate::norms::{
    besov_norm, decay_profile, lorentz_norm, node_lorentz_norms, q_norm_loc,
    q_seminorm_double_integral, trajectory_lorentz_norm, x_norm, CarlesonWindowSet, NormReport,
};
use crate::picard::{
    bilinear_samples, compare_mollified_to_mild, estimate_bilinear_constant,
    lorentz_bilinear_ratios, pointwise_lorentz_bound, sample_trajectory, solve_mild,
    solve_mollified, PicardConfig, PicardTrace,
};
use crate::snapshot::{read_snapshot, read_trajectory, write_snapshot, write_trajectory};
use crate::torus::{SpectralVectorField, TorusGrid};

/// Worst admissible `||div||_inf / (1 + ||u||_inf)` of an iterate.
pub const DIVERGENCE_LIMIT: f64 = 1e-10;

/// Slack allowed on the pointwise Lorentz bound and the epsilon comparison.
pub const BOUND_SLACK: f64 = 1.1;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Init,
    SolveMild { input: Option<PathBuf> },
    SolveMollified { epsilon: Option<f64>, input: Option<PathBuf> },
    CompareEps { input: Option<PathBuf> },
    Norms { input: PathBuf },
    VerifyInequalities,
    KernelTable,
    DecayProfile { input: Option<PathBuf> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Init => "init",
            Command::SolveMild { .. } => "solve-mild",
            Command::SolveMollified { .. } => "solve-mollified",
            Command::CompareEps { .. } => "compare-eps",
            Command::Norms { .. } => "norms",
            Command::VerifyInequalities => "verify-inequalities",
            Command::KernelTable => "kernel-table",
            Command::DecayProfile { .. } => "decay-profile",
        }
    }

    fn input(&self) -> Option<&Path> {
        match self {
            Command::SolveMild { input }
            | Command::SolveMollified { input, .. }
            | Command::CompareEps { input }
            | Command::DecayProfile { input } => input.as_deref(),
            Command::Norms { input } => Some(input),
            _ => None,
        }
    }
}

/// Shortest round-trip decimal form.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), num)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(path: &Path, rows: &[(&str, String)]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|(k, v)| vec![k.to_string(), v.clone()])
        .collect();
    write_csv(path, &["key", "value"], &rows)
}

fn write_manifest(cfg: &ExperimentConfig, cmd: &Command, status: &str) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("fgns_version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("snapshot_version = {}\n", crate::snapshot::VERSION));
    text.push_str(&format!("subcommand = {}\n", cmd.name()));
    if let Command::SolveMollified {
        epsilon: Some(e), ..
    } = cmd
    {
        text.push_str(&format!("epsilon = {}\n", num(*e)));
    }
    if let Some(p) = cmd.input() {
        text.push_str(&format!("input = {}\n", p.display()));
    }
    text.push_str(&format!("status = {status}\n"));
    text.push_str(&cfg.to_text());
    fs::write(cfg.out_dir.join("manifest.txt"), text)?;
    Ok(())
}

/// Runs a subcommand and writes its manifest, flagging failed runs.
pub fn run(cfg: &ExperimentConfig, cmd: &Command) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)?;
    let result = match cmd {
        Command::Init => run_init(cfg),
        Command::SolveMild { input } => run_solve(cfg, input.as_deref(), None),
        Command::SolveMollified { epsilon, input } => {
            let eps = match epsilon.or_else(|| cfg.eps_list.first().copied()) {
                Some(e) => e,
                None => return Err(FgnsError::config("eps", "no epsilon given")),
            };
            run_solve(cfg, input.as_deref(), Some(eps))
        }
        Command::CompareEps { input } => run_compare(cfg, input.as_deref()),
        Command::Norms { input } => run_norms(cfg, input),
        Command::VerifyInequalities => run_verify(cfg),
        Command::KernelTable => run_kernel_table(cfg),
        Command::DecayProfile { input } => run_decay(cfg, input.as_deref()),
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("failed (partial artifacts): {e}"),
    };
    write_manifest(cfg, cmd, &status)?;
    result
}

fn initial_data(cfg: &ExperimentConfig, input: Option<&Path>) -> Result<SpectralVectorField> {
    match input {
        Some(p) => Ok(read_snapshot(p)?.0),
        None => generate_initial_data(cfg.init_kind, cfg.init_amplitude, cfg.seed, &cfg.grid()?),
    }
}

fn run_init(cfg: &ExperimentConfig) -> Result<()> {
    let u0 = initial_data(cfg, None)?;
    write_snapshot(&cfg.out_dir.join("u0.fgns"), &u0, 0.0)
}

/// Configured constant, or the seeded sample estimate (also written to
/// `bilinear.csv`).
fn bilinear_constant(cfg: &ExperimentConfig, pc: &PicardConfig, grid: &TorusGrid) -> Result<f64> {
    if let Some(c) = cfg.bilinear_constant {
        return Ok(c);
    }
    let samples = bilinear_samples(grid, cfg.bilinear_samples, pc, cfg.seed)?;
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| vec![s.index.to_string(), num(s.ratio)])
        .collect();
    write_csv(&cfg.out_dir.join("bilinear.csv"), &["sample", "ratio"], &rows)?;
    samples
        .iter()
        .map(|s| s.ratio)
        .reduce(f64::max)
        .ok_or(FgnsError::EmptySample)
}

fn write_trace(path: &Path, trace: &PicardTrace) -> Result<()> {
    let rows: Vec<Vec<String>> = trace
        .steps
        .iter()
        .map(|s| vec![s.iter.to_string(), num(s.norm), num(s.diff), opt(s.ratio)])
        .collect();
    write_csv(path, &["iter", "norm", "diff", "ratio"], &rows)
}

fn trace_summary(trace: &PicardTrace) -> Vec<(&'static str, String)> {
    vec![
        ("horizon", num(trace.horizon)),
        ("initial_norm", num(trace.initial_norm)),
        ("indicator", opt(trace.indicator)),
        ("guaranteed", trace.guaranteed.to_string()),
        ("converged", trace.converged.to_string()),
        ("iterations", trace.steps.len().to_string()),
        ("max_ratio", opt(trace.max_ratio())),
        ("ball_invariant", trace.ball_invariant.to_string()),
        ("residual", opt(trace.residual)),
        ("max_divergence", num(trace.max_divergence)),
    ]
}

fn check_trace(trace: &PicardTrace) -> Result<()> {
    if trace.max_divergence > DIVERGENCE_LIMIT {
        return Err(FgnsError::InvariantViolated(format!(
            "iterate divergence {:e} exceeds {DIVERGENCE_LIMIT:e}",
            trace.max_divergence
        )));
    }
    if trace.guaranteed && !trace.ball_invariant {
        return Err(FgnsError::InvariantViolated(
            "iterates left the ball of radius 2 ||e0|| under smallness".into(),
        ));
    }
    Ok(())
}

fn run_solve(cfg: &ExperimentConfig, input: Option<&Path>, epsilon: Option<f64>) -> Result<()> {
    let u0 = initial_data(cfg, input)?;
    let mut pc = cfg.picard()?;
    pc.bilinear_constant = Some(bilinear_constant(cfg, &pc, u0.grid())?);
    write_snapshot(&cfg.out_dir.join("u0.fgns"), &u0, 0.0)?;
    let result = match epsilon {
        None => solve_mild(&u0, &pc),
        Some(e) => solve_mollified(&u0, e, &pc),
    };
    let (u, trace) = match result {
        Ok(r) => r,
        Err(FgnsError::Diverged(t)) | Err(FgnsError::NotConverged(t))
            if !t.steps.is_empty() =>
        {
            write_trace(&cfg.out_dir.join("trace.csv"), &t)?;
            return Err(if t.converged {
                FgnsError::NotConverged(t)
            } else {
                FgnsError::Diverged(t)
            });
        }
        Err(e) => return Err(e),
    };
    write_trace(&cfg.out_dir.join("trace.csv"), &trace)?;
    write_trajectory(&cfg.out_dir.join("trajectory"), &u)?;
    let windows = trajectory_windows(cfg, &u)?;
    let xn = x_norm(&u, &pc.model, &windows)?;
    let mut summary = trace_summary(&trace);
    summary.push(("bilinear_constant", opt(pc.bilinear_constant)));
    summary.push(("x_norm", num(xn.value)));
    if let Some(e) = epsilon {
        summary.push(("epsilon", num(e)));
    }
    write_summary(&cfg.out_dir.join("summary.csv"), &summary)?;
    check_trace(&trace)
}

/// Windows of the configured shape on the trajectory's own horizon.
fn trajectory_windows(cfg: &ExperimentConfig, u: &TrajectoryField) -> Result<CarlesonWindowSet> {
    cfg.picard()?
        .with_horizon(u.mesh().horizon())
        .windows(u.grid())
}

fn run_compare(cfg: &ExperimentConfig, input: Option<&Path>) -> Result<()> {
    let u0 = initial_data(cfg, input)?;
    let mut pc = cfg.picard()?;
    pc.bilinear_constant = Some(bilinear_constant(cfg, &pc, u0.grid())?);
    let report = compare_mollified_to_mild(&u0, &cfg.eps_list, &pc)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.epsilon),
                num(r.lhs),
                num(r.rhs),
                num(r.mollifier_gap),
                if r.rhs > 0.0 { num(r.lhs / r.rhs) } else { String::new() },
                r.iterations.to_string(),
            ]
        })
        .collect();
    write_csv(
        &cfg.out_dir.join("compare_eps.csv"),
        &["epsilon", "error", "bound", "mollifier_gap", "error_over_bound", "iterations"],
        &rows,
    )?;
    let bound = report.bound_holds(BOUND_SLACK);
    let decreasing = report.strictly_decreasing();
    write_summary(
        &cfg.out_dir.join("summary.csv"),
        &[
            ("indicator", num(report.indicator)),
            ("bilinear_constant", num(report.constant)),
            ("bound_holds", bound.to_string()),
            ("strictly_decreasing", decreasing.to_string()),
        ],
    )?;
    if !bound || !decreasing {
        return Err(FgnsError::InvariantViolated(format!(
            "epsilon comparison: bound holds = {bound}, strictly decreasing = {decreasing}"
        )));
    }
    Ok(())
}

fn norm_row(r: &NormReport) -> Vec<String> {
    vec![
        r.name.clone(),
        num(r.value),
        opt(r.radius),
        r.center.map_or(String::new(), |c| c.to_string()),
        opt(r.time),
    ]
}

fn plain_row(name: &str, value: f64) -> Vec<String> {
    vec![name.into(), num(value), String::new(), String::new(), String::new()]
}

fn run_norms(cfg: &ExperimentConfig, input: &Path) -> Result<()> {
    let model = cfg.model()?;
    let lp = cfg.lorentz()?;
    let mut rows = Vec::new();
    if input.is_dir() {
        let u = read_trajectory(input)?;
        let windows = trajectory_windows(cfg, &u)?;
        let xn = x_norm(&u, &model, &windows)?;
        rows.push(norm_row(&xn));
        for (name, v) in &xn.parts {
            rows.push(plain_row(&format!("x_norm.{name}"), *v));
        }
        let sup = node_lorentz_norms(&u, lp.q())?.into_iter().fold(0.0, f64::max);
        rows.push(plain_row("sup_lorentz", sup));
        rows.push(plain_row("time_lorentz", trajectory_lorentz_norm(&u, lp.p(), lp.q())?));
        rows.push(plain_row("decay_sup", decay_profile(&u, &lp)?.sup));
    } else {
        let (u0, _) = read_snapshot(input)?;
        let pc = cfg.picard()?;
        let mesh = pc.mesh()?;
        let windows = pc.windows(u0.grid())?;
        rows.push(plain_row("linf", u0.linf_norm()));
        rows.push(plain_row("l2", u0.l2_norm()));
        rows.push(plain_row("lorentz", lorentz_norm(&u0, lp.q())?));
        rows.push(norm_row(&q_norm_loc(&u0, &model, &windows, &mesh)?));
        match besov_norm(&u0, cfg.alpha, cfg.beta, lp.q(), &mesh) {
            Ok(b) => rows.push(norm_row(&b.report)),
            Err(FgnsError::MeshTooCoarse(_)) => {}
            Err(e) => return Err(e),
        }
        if u0.grid().n() <= 32 {
            let phys = u0.to_physical();
            for (i, comp) in phys.iter().enumerate() {
                let mut r = q_seminorm_double_integral(comp, u0.grid(), &model)?;
                r.name = format!("q_seminorm[{i}]");
                rows.push(norm_row(&r));
            }
        }
    }
    write_csv(
        &cfg.out_dir.join("norms.csv"),
        &["name", "value", "r", "x0_index", "time"],
        &rows,
    )
}

fn run_verify(cfg: &ExperimentConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let pc = cfg.picard()?;
    let lp = cfg.lorentz()?;
    let mesh = pc.mesh()?;
    let duhamel = pc.duhamel()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bound_rows = Vec::new();
    let mut constant_rows = Vec::new();
    let mut worst: f64 = 0.0;
    for pair in 0..cfg.bilinear_samples {
        let u = sample_trajectory(&grid, &mesh, cfg.beta, &mut rng)?;
        let v = sample_trajectory(&grid, &mesh, cfg.beta, &mut rng)?;
        for (node, b) in pointwise_lorentz_bound(&duhamel, &u, &v, &lp)?.iter().enumerate() {
            let ratio = if b.rhs > 0.0 { Some(b.lhs / b.rhs) } else { None };
            if let Some(r) = ratio {
                worst = worst.max(r);
            }
            bound_rows.push(vec![
                pair.to_string(),
                node.to_string(),
                num(b.time),
                num(b.lhs),
                num(b.rhs),
                opt(ratio),
            ]);
        }
        let c = lorentz_bilinear_ratios(&duhamel, &u, &v, &lp)?;
        let mut row = vec![pair.to_string()];
        row.extend(c.iter().map(|x| opt(*x)));
        constant_rows.push(row);
    }
    write_csv(
        &cfg.out_dir.join("pointwise_bound.csv"),
        &["pair", "node", "t", "lhs", "rhs", "ratio"],
        &bound_rows,
    )?;
    write_csv(
        &cfg.out_dir.join("lorentz_constants.csv"),
        &["pair", "pp_p", "inf_p_inf", "inf_inf_inf", "inf_p_p"],
        &constant_rows,
    )?;
    let constant = estimate_bilinear_constant(&grid, cfg.bilinear_samples, &pc, cfg.seed)?;
    let kg = cfg.kernel_grid()?;
    let mut decay_rows = Vec::new();
    for &t in &cfg.kernel_times {
        let k = OseenKernel::compute(cfg.beta, t, &kg)?;
        decay_rows.push(vec![num(cfg.beta), num(t), num(k.decay_constant())]);
    }
    write_csv(
        &cfg.out_dir.join("kernel_decay.csv"),
        &["beta", "t", "decay_constant"],
        &decay_rows,
    )?;
    let holds = worst <= BOUND_SLACK;
    write_summary(
        &cfg.out_dir.join("summary.csv"),
        &[
            ("pointwise_bound_max_ratio", num(worst)),
            ("pointwise_bound_holds", holds.to_string()),
            ("bilinear_constant", num(constant)),
        ],
    )?;
    if !holds {
        return Err(FgnsError::InvariantViolated(format!(
            "pointwise Lorentz bound exceeded: worst ratio {worst}"
        )));
    }
    Ok(())
}

fn table_rows(t: &KernelTable, rows: &mut Vec<Vec<String>>) {
    for (r, v) in t.radii.iter().zip(&t.values) {
        rows.push(vec![num(t.beta), num(t.t), t.label(), num(*r), num(*v)]);
    }
    if let Some(reference) = &t.reference {
        for (r, v) in t.radii.iter().zip(reference) {
            rows.push(vec![num(t.beta), num(t.t), "gauss-axis".into(), num(*r), num(*v)]);
        }
    }
}

fn run_kernel_table(cfg: &ExperimentConfig) -> Result<()> {
    let kg = cfg.kernel_grid()?;
    let h = kg.spacing();
    let count = (kg.inner_radius() / h).floor() as usize;
    let radii: Vec<f64> = (0..=count).map(|m| m as f64 * h).collect();
    let mut rows = Vec::new();
    let mut decay = Vec::new();
    for &t in &cfg.kernel_times {
        table_rows(&heat_kernel_table(cfg.beta, t, &radii, &kg)?, &mut rows);
        let k = OseenKernel::compute(cfg.beta, t, &kg)?;
        for tab in k.tables() {
            table_rows(tab, &mut rows);
        }
        let axis = fit_decay_constant(k.magnitude_table(Ray::Axis), cfg.beta, t, cfg.dim)?;
        decay.push(vec![
            num(cfg.beta),
            num(t),
            num(axis),
            num(k.decay_constant()),
            num(k.lr_norm(2.0)?),
            num(k.weak_lr_norm(2.0)?),
        ]);
    }
    write_csv(
        &cfg.out_dir.join("kernel_table.csv"),
        &["beta", "t", "component", "r", "value"],
        &rows,
    )?;
    write_csv(
        &cfg.out_dir.join("kernel_constants.csv"),
        &["beta", "t", "axis_decay_constant", "decay_constant", "l2_norm", "weak_l2_norm"],
        &decay,
    )
}

fn run_decay(cfg: &ExperimentConfig, input: Option<&Path>) -> Result<()> {
    let lp = cfg.lorentz()?;
    let u = match input {
        Some(p) if p.is_dir() => read_trajectory(p)?,
        _ => {
            let u0 = initial_data(cfg, input)?;
            let mut pc = cfg.picard()?;
            pc.bilinear_constant = Some(bilinear_constant(cfg, &pc, u0.grid())?);
            let (u, trace) = solve_mild(&u0, &pc)?;
            write_trace(&cfg.out_dir.join("trace.csv"), &trace)?;
            u
        }
    };
    let prof = decay_profile(&u, &lp)?;
    let rows: Vec<Vec<String>> = prof
        .times
        .iter()
        .zip(&prof.values)
        .map(|(t, v)| vec![num(*t), num(*v)])
        .collect();
    write_csv(&cfg.out_dir.join("decay_profile.csv"), &["t", "value"], &rows)?;
    let mut summary = vec![("sup", num(prof.sup))];
    let names = ["smallest_0", "smallest_1", "smallest_2"];
    for (n, v) in names.iter().zip(&prof.smallest) {
        summary.push((n, num(*v)));
    }
    write_summary(&cfg.out_dir.join("summary.csv"), &summary)
}
