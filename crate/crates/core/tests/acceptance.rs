//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use fgns::duhamel::{Duhamel, QuadratureRule, TimeMesh, TrajectoryField};
use fgns::initial::{random_bandlimited, taylor_green_shells};
use fgns::kernels::{heat_kernel_table, lr_rate, loglog_slope, KernelGrid, OseenKernel};
use fgns::norms::{caloric_extension, lorentz_norm, q_norm_loc, time_lorentz_norm, x_norm};
use fgns::params::{LorentzParams, ModelParams};
use fgns::picard::{
    compare_mollified_to_mild, estimate_bilinear_constant, lorentz_picard, lorentz_threshold,
    pointwise_lorentz_bound, sample_trajectory, solve_mild, PicardConfig,
};
use fgns::torus::{
    fractional_semigroup, leray_project, nonlinear_tensor, SpectralVectorField, TorusGrid,
};
use fgns::FgnsError;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(start: Instant, limit: f64, detail: String) -> Outcome {
    let secs = start.elapsed().as_secs_f64();
    check(secs < limit, format!("{detail}; {secs:.1}s of {limit}s"))
}

fn model() -> ModelParams {
    ModelParams::new(0.5, 0.75, 2).unwrap()
}

fn rel_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.iter().zip(y) {
            num = num.max((p - q).norm());
            den = den.max(q.norm());
        }
    }
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn gaussian_heat(grid_check: bool) -> Outcome {
    let start = Instant::now();
    let g = TorusGrid::new(2, 32, 2.0 * PI).unwrap();
    let mut worst_mode: f64 = 0.0;
    for k in [[1i64, 0, 0], [3, -2, 0], [7, 5, 0], [-15, 9, 0]] {
        let m = g.mode_of(k).unwrap();
        let c = g.conjugate_mode(m);
        let mut comps = vec![vec![Complex64::default(); g.len()]; 2];
        comps[0][m] = Complex64::new(0.3, 0.4);
        comps[0][c] = Complex64::new(0.3, -0.4);
        let u = SpectralVectorField::from_coeffs(&g, comps).unwrap();
        for t in [1e-3, 0.01, 0.1, 0.7] {
            let v = fractional_semigroup(&u, t, 1.0).unwrap();
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            let expect = u.component(0)[m] * (-t * k2).exp();
            worst_mode = worst_mode.max((v.component(0)[m] - expect).norm() / expect.norm());
        }
    }
    let mut worst_kernel: f64 = 0.0;
    for dim in [2, 3] {
        let kg = KernelGrid::new(256, 2.0 * PI, dim).unwrap();
        let radii: Vec<f64> = (0..=64).map(|i| i as f64 * kg.spacing()).collect();
        for t in [0.01, 0.1] {
            let table = heat_kernel_table(1.0, t, &radii, &kg).unwrap();
            let peak = (4.0 * PI * t).powf(-(dim as f64) / 2.0);
            for (r, v) in radii.iter().zip(&table.values) {
                let exact = peak * (-r * r / (4.0 * t)).exp();
                worst_kernel = worst_kernel.max((v - exact).abs() / peak);
            }
        }
    }
    let ok = worst_mode < 1e-12 && (!grid_check || worst_kernel < 1e-6);
    let detail = format!("mode error {worst_mode:.2e}, kernel error {worst_kernel:.2e}");
    if ok {
        within(start, 5.0, detail)
    } else {
        Err(detail)
    }
}

fn projection_suite() -> Outcome {
    let g = TorusGrid::new(2, 64, 2.0 * PI).unwrap();
    let mut worst_grad: f64 = 0.0;
    let mut worst_idem: f64 = 0.0;
    for seed in 0..20u64 {
        let phi = common::random_scalar(&g, 1000 + seed);
        let mut comps = vec![vec![Complex64::default(); g.len()]; 2];
        for m in 0..g.len() {
            let k = g.deriv_wavevector(m);
            for a in 0..2 {
                comps[a][m] = Complex64::new(0.0, k[a]) * phi[m];
            }
        }
        let grad = SpectralVectorField::from_coeffs(&g, comps).unwrap();
        let pg = leray_project(&grad);
        worst_grad = worst_grad.max(common::coeff_l2(pg.components()) / common::coeff_l2(grad.components()));
        let u = common::random_field(&g, seed);
        let pu = leray_project(&u);
        let ppu = leray_project(&pu);
        let d = ppu.sub(&pu).unwrap();
        worst_idem = worst_idem.max(common::coeff_l2(d.components()) / common::coeff_l2(pu.components()));
    }
    check(
        worst_grad < 1e-12 && worst_idem < 1e-12,
        format!("|P grad phi| {worst_grad:.2e}, |P^2 u - P u| {worst_idem:.2e}"),
    )
}

fn oseen_decay() -> Outcome {
    let start = Instant::now();
    let times = [0.25, 0.5, 1.0, 2.0];
    let r = 2.0;
    let mut lines = Vec::new();
    let mut ok = true;
    for beta in [0.75, 1.0] {
        let kg = KernelGrid::new(64, 4.0 * PI, 3).unwrap();
        let mut consts = Vec::new();
        let mut norms = Vec::new();
        for &t in &times {
            let k = OseenKernel::compute(beta, t, &kg).unwrap();
            consts.push(k.decay_constant());
            norms.push(k.lr_norm(r).unwrap());
        }
        let spread = consts.iter().cloned().fold(0.0, f64::max)
            / consts.iter().cloned().fold(f64::INFINITY, f64::min);
        let slope = loglog_slope(&times, &norms).unwrap();
        let rate = lr_rate(beta, 3, r);
        let rel = ((slope - rate) / rate).abs();
        ok &= spread <= 2.0 && rel <= 0.05;
        lines.push(format!(
            "beta {beta}: spread {spread:.3}, slope {slope:.4} vs {rate:.4} ({:.1}%)",
            100.0 * rel
        ));
    }
    let detail = lines.join("; ");
    if ok {
        within(start, 60.0, detail)
    } else {
        Err(detail)
    }
}

fn pointwise_bound() -> Outcome {
    let g = TorusGrid::new(2, 32, 2.0 * PI).unwrap();
    let mesh = TimeMesh::graded(1.0, 31, 2.0).unwrap();
    let lp = LorentzParams::from_q(8.0, 0.75, 2).unwrap();
    let duhamel = Duhamel::new(0.75, QuadratureRule::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let u = sample_trajectory(&g, &mesh, 0.75, &mut rng).unwrap();
        let v = sample_trajectory(&g, &mesh, 0.75, &mut rng).unwrap();
        for b in pointwise_lorentz_bound(&duhamel, &u, &v, &lp).unwrap() {
            if b.rhs > 0.0 {
                worst = worst.max(b.lhs / b.rhs);
            } else if b.lhs > 0.0 {
                return Err(format!("nonzero lhs {} against zero rhs at t = {}", b.lhs, b.time));
            }
        }
    }
    check(worst <= 1.1, format!("worst lhs/rhs over 10 pairs x 32 nodes {worst:.4}"))
}

struct SolverSetup {
    cfg: PicardConfig,
    data: SpectralVectorField,
    indicator: f64,
}

/// Two-shell Taylor-Green data scaled to smallness indicator 0.5.
fn solver_setup() -> SolverSetup {
    let grid = TorusGrid::new(2, 64, 2.0 * PI).unwrap();
    let mut cfg = PicardConfig::new(model());
    cfg.intervals = 31;
    let c = estimate_bilinear_constant(&grid, 10, &cfg, 0).unwrap();
    cfg.bilinear_constant = Some(c);
    let unit = taylor_green_shells(&grid, &[(1, 1.0), (2, 0.5)], 1.0).unwrap();
    let e0 = caloric_extension(&unit, &cfg.mesh().unwrap(), 0.75).unwrap();
    let windows = cfg.windows(&grid).unwrap();
    let ind1 = 4.0 * c * x_norm(&e0, &cfg.model, &windows).unwrap().value;
    let data = taylor_green_shells(&grid, &[(1, 1.0), (2, 0.5)], 0.5 / ind1).unwrap();
    SolverSetup {
        cfg,
        data,
        indicator: 0.5,
    }
}

fn contraction(s: &SolverSetup) -> Outcome {
    let start = Instant::now();
    let (_, tr) = solve_mild(&s.data, &s.cfg).map_err(|e| e.to_string())?;
    let ind = tr.indicator.unwrap_or(f64::NAN);
    let ratios: Vec<f64> = tr.steps.iter().filter_map(|st| st.ratio).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let ball = tr.steps.iter().all(|st| st.norm <= 2.0 * tr.initial_norm);
    let ok = tr.converged
        && tr.steps.len() <= 10
        && ratios.iter().all(|&r| r < 1.0)
        && max_ratio <= 1.25 * s.indicator
        && ball
        && tr.ball_invariant;
    let detail = format!(
        "indicator {ind:.3}, {} iterations, max ratio {max_ratio:.4}, ball {ball}",
        tr.steps.len()
    );
    if ok {
        within(start, 120.0, detail)
    } else {
        Err(detail)
    }
}

fn lorentz_threshold_probe() -> Outcome {
    let g = TorusGrid::new(2, 32, 2.0 * PI).unwrap();
    let lp = LorentzParams::from_q(8.0, 0.75, 2).unwrap();
    let mut cfg = PicardConfig::new(model());
    cfg.intervals = 16;
    let horizon = 0.5;
    let unit = taylor_green_shells(&g, &[(1, 1.0), (2, 0.5)], 1.0).unwrap();
    let ind1 = lorentz_threshold(&unit, &lp, horizon).unwrap();
    let at = |target: f64| unit.scale(target / ind1);
    let accepted = at(0.99);
    let (_, tr) = lorentz_picard(&accepted, &lp, horizon, &cfg).map_err(|e| e.to_string())?;
    let data_norm = lorentz_norm(&accepted, lp.q()).unwrap();
    let ball = tr.steps.iter().all(|s| s.norm <= 2.0 * data_norm);
    let rejected = matches!(
        lorentz_picard(&at(1.01), &lp, horizon, &cfg),
        Err(FgnsError::ThresholdViolated { .. })
    );
    check(
        tr.converged && ball && tr.ball_invariant && rejected,
        format!(
            "0.99 accepted ({} iterations, ball {ball}), 1.01 rejected {rejected}",
            tr.steps.len()
        ),
    )
}

fn epsilon_convergence(s: &SolverSetup) -> Outcome {
    let start = Instant::now();
    let report = compare_mollified_to_mild(&s.data, &[0.2, 0.1, 0.05], &s.cfg)
        .map_err(|e| e.to_string())?;
    let cols: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("eps {}: {:.3e} <= {:.3e}", r.epsilon, r.lhs, r.rhs))
        .collect();
    let ok = report.strictly_decreasing() && report.bound_holds(1.1);
    let detail = cols.join(", ");
    if ok {
        within(start, 300.0, detail)
    } else {
        Err(detail)
    }
}

fn weak_time_norm() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [2.5, 6.0, 12.0] {
        for horizon in [0.5, 1.0, 3.0] {
            let mesh = TimeMesh::graded(horizon, 511, 2.0).unwrap();
            let series: Vec<f64> = mesh
                .nodes()
                .iter()
                .map(|&s| if s == 0.0 { 0.0 } else { s.powf(-1.0 / p) })
                .collect();
            let v = time_lorentz_norm(&series, &mesh, p).unwrap();
            worst = worst.max((v - 1.0).abs());
        }
    }
    check(worst < 0.02, format!("max |norm - 1| {worst:.2e}"))
}

fn scaling_invariance() -> Outcome {
    let g = TorusGrid::new(2, 64, 2.0 * PI).unwrap();
    let m = model();
    let cfg = PicardConfig::new(m);
    let windows = cfg.windows(&g).unwrap();
    let mesh = cfg.mesh().unwrap();
    let lambda = 2.0;
    let scaled_windows = windows.rescaled(lambda, windows.stride() / 2).unwrap();
    let scaled_mesh = mesh.rescaled(mesh.horizon() / lambda.powf(1.5)).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let u0 = random_bandlimited(&g, 4, 1.0, seed).unwrap();
        let a = q_norm_loc(&u0, &m, &windows, &mesh).unwrap().value;
        let ul = common::dilate(&u0, 2, 0.75);
        let b = q_norm_loc(&ul, &m, &scaled_windows, &scaled_mesh).unwrap().value;
        worst = worst.max((a - b).abs() / a);
    }
    check(worst < 0.05, format!("max relative change {worst:.3e}"))
}

fn oracle_equivalences() -> Outcome {
    let g = TorusGrid::new(2, 32, 2.0 * PI).unwrap();
    let u = common::random_field(&g, 1);
    let v = common::random_field(&g, 2);
    let t = nonlinear_tensor(&u, &v).unwrap();
    let mut got = Vec::new();
    let mut want = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            got.push(t.component(i, j).to_vec());
            want.push(common::direct_product(&g, u.component(i), v.component(j)));
        }
    }
    let conv = rel_diff(&got, &want);

    let mut lorentz: f64 = 0.0;
    for seed in 0..5 {
        let w = random_bandlimited(&g, 5, 1.0, seed).unwrap();
        for q in [2.5, 4.0, 8.0] {
            let a = lorentz_norm(&w, q).unwrap();
            let b = common::lorentz_by_levels(&w.magnitude(), g.cell_volume(), q);
            lorentz = lorentz.max((a - b).abs() / b);
        }
    }

    let m = model();
    let cfg = PicardConfig::new(m);
    let windows = cfg.windows(&g).unwrap();
    let mesh = cfg.mesh().unwrap();
    let mut dense: f64 = 0.0;
    for seed in 0..2 {
        let u0 = random_bandlimited(&g, 4, 1.0, 40 + seed).unwrap();
        let a = q_norm_loc(&u0, &m, &windows, &mesh).unwrap().value;
        let b = common::carleson_of_caloric_2d(&u0, &m, &windows);
        dense = dense.max((a - b).abs() / b);
    }

    let mesh = TimeMesh::graded(0.1, 31, 2.0).unwrap();
    let single = |k: [i64; 3], comp: usize| {
        let m = g.mode_of(k).unwrap();
        let mut c = vec![vec![Complex64::default(); g.len()]; 2];
        c[comp][m] = Complex64::new(0.0, -0.5);
        c[comp][g.conjugate_mode(m)] = Complex64::new(0.0, 0.5);
        SpectralVectorField::from_coeffs(&g, c).unwrap()
    };
    // (sin 2y, 0) advecting (0, sin 3x)
    let a = TrajectoryField::constant(&single([0, 2, 0], 0), &mesh);
    let b = TrajectoryField::constant(&single([3, 0, 0], 1), &mesh);
    let coarse = Duhamel::new(0.75, QuadratureRule::new(2.0, 32).unwrap()).unwrap();
    let fine = Duhamel::new(0.75, QuadratureRule::new(2.0, 320).unwrap()).unwrap();
    let bc = coarse.apply(&a, &b).unwrap();
    let bf = fine.apply(&a, &b).unwrap();
    let mut refine: f64 = 0.0;
    for (x, y) in bc.states().iter().zip(bf.states()).skip(1) {
        refine = refine.max(rel_diff(x.components(), y.components()));
    }
    if bf.state(mesh.len() - 1).max_coeff() == 0.0 {
        return Err("single-mode B vanished identically".into());
    }
    check(
        conv <= 1e-10 && lorentz <= 1e-10 && dense <= 0.02 && refine <= 1e-6,
        format!(
            "convolution {conv:.2e}, level sweep {lorentz:.2e}, dense window {:.2}%, refinement {refine:.2e}",
            100.0 * dense
        ),
    )
}

fn collect_artifacts(dir: &Path, out: &mut Vec<(String, Vec<u8>)>, prefix: &str) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        let name = format!("{prefix}{}", p.file_name().unwrap().to_string_lossy());
        if p.is_dir() {
            collect_artifacts(&p, out, &format!("{name}/"));
        } else if name.ends_with(".csv") || name.ends_with(".fgns") {
            out.push((name, fs::read(&p).unwrap()));
        }
    }
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_fgns");
    let root = tempfile::tempdir().unwrap();
    let init = root.path().join("init");
    let status = Process::new(exe)
        .args(["init", "--grid.N", "16", "--set", "init.kind=random_bandlimited", "--out"])
        .arg(&init)
        .status()
        .unwrap();
    if !status.success() {
        return Err("init failed".into());
    }
    let input = init.join("u0.fgns");
    let runs: Vec<Vec<String>> = vec![
        vec!["init".into()],
        vec!["solve-mild".into()],
        vec!["solve-mollified".into(), "--eps".into(), "0.3".into()],
        vec!["compare-eps".into()],
        vec!["norms".into(), "--input".into(), input.display().to_string()],
        vec!["verify-inequalities".into()],
        vec!["kernel-table".into()],
        vec!["decay-profile".into()],
    ];
    let mut compared = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = root.path().join(format!("run{i}_{rep}"));
            let status = Process::new(exe)
                .args(args)
                .args(["--grid.N", "16", "--seed", "3", "--set", "kernel.N=32"])
                .args(["--set", "mesh.nodes=16", "--out"])
                .arg(&out)
                .status()
                .unwrap();
            if !status.success() {
                return Err(format!("`{}` exited with {status}", args.join(" ")));
            }
            let mut files = Vec::new();
            collect_artifacts(&out, &mut files, "");
            outputs.push(files);
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            return Err(format!("`{}` produced differing artifacts", args.join(" ")));
        }
        compared += outputs[0].len();
    }
    Ok(format!("8 subcommands, {compared} artifacts bit-identical across two runs"))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(e) => Err(format!(
            "panicked: {}",
            e.downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default()
        )),
    }
}

fn main() {
    let mut setup: Option<SolverSetup> = None;
    let mut solver = |f: fn(&SolverSetup) -> Outcome| {
        guarded(|| f(setup.get_or_insert_with(solver_setup)))
    };
    let c5 = solver(contraction);
    let c7 = solver(epsilon_convergence);
    let results = [
        ("1 Gaussian oracle", guarded(|| gaussian_heat(true))),
        ("2 projection suite", guarded(projection_suite)),
        ("3 Oseen decay bound", guarded(oseen_decay)),
        ("4 pointwise Lorentz bound", guarded(pointwise_bound)),
        ("5 contraction", c5),
        ("6 Lorentz threshold", guarded(lorentz_threshold_probe)),
        ("7 epsilon convergence", c7),
        ("8 weak time norm", guarded(weak_time_norm)),
        ("9 scaling invariance", guarded(scaling_invariance)),
        ("10 oracle equivalences", guarded(oracle_equivalences)),
        ("11 determinism", guarded(determinism)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("criterion {name}: PASS ({d})"),
            Err(d) => {
                failed += 1;
                println!("criterion {name}: FAIL ({d})");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
