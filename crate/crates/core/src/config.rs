//! Flat `key = value` experiment configuration with dotted keys.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::duhamel::QuadratureRule;
use crate::error::{FgnsError, Result};
use crate::initial::InitialKind;
use crate::kernels::KernelGrid;
use crate::params::{LorentzParams, ModelParams};
use crate::picard::{NormMode, PicardConfig};
use crate::torus::TorusGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub n: usize,
    pub box_len: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lorentz_q: f64,
    /// Derived from `q` and `beta` when absent.
    pub lorentz_p: Option<f64>,
    pub horizon: f64,
    pub mesh_intervals: usize,
    pub mesh_grading: f64,
    pub window_levels: usize,
    pub window_stride: Option<usize>,
    pub max_iter: usize,
    pub stop_tol: f64,
    pub norm_mode: NormMode,
    pub bisect: bool,
    pub quad_gamma: f64,
    pub quad_panels: usize,
    pub seed: u64,
    pub eps_list: Vec<f64>,
    pub init_kind: InitialKind,
    pub init_amplitude: f64,
    pub bilinear_samples: usize,
    pub bilinear_constant: Option<f64>,
    pub kernel_n: usize,
    pub kernel_box: Option<f64>,
    pub kernel_times: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 64,
            box_len: 2.0 * PI,
            alpha: 0.5,
            beta: 0.75,
            lorentz_q: 8.0,
            lorentz_p: None,
            horizon: 1.0,
            mesh_intervals: 32,
            mesh_grading: 2.0,
            window_levels: 6,
            window_stride: None,
            max_iter: 20,
            stop_tol: 1e-8,
            norm_mode: NormMode::X,
            bisect: false,
            quad_gamma: 2.0,
            quad_panels: 32,
            seed: 0,
            eps_list: vec![0.2, 0.1, 0.05],
            init_kind: InitialKind::TaylorGreenPair,
            init_amplitude: 1.0,
            bilinear_samples: 10,
            bilinear_constant: None,
            kernel_n: 64,
            kernel_box: None,
            kernel_times: vec![0.25, 0.5, 1.0, 2.0],
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Every recognised key, in manifest order.
pub const KEYS: &[&str] = &[
    "grid.dim",
    "grid.N",
    "grid.L",
    "model.alpha",
    "model.beta",
    "lorentz.q",
    "lorentz.p",
    "horizon.T",
    "mesh.nodes",
    "mesh.grading",
    "windows.J",
    "windows.stride",
    "solver.max_iter",
    "solver.tol",
    "solver.norm",
    "solver.bisect",
    "quadrature.gamma",
    "quadrature.panels",
    "seed",
    "eps",
    "init.kind",
    "init.amplitude",
    "bilinear.samples",
    "bilinear.constant",
    "kernel.N",
    "kernel.L",
    "kernel.t",
    "output.dir",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| FgnsError::config(key, format!("cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse::<f64>(key, s.trim()))
        .collect()
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn opt_text<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or("auto".to_string(), |x| x.to_string())
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "grid.dim" => self.dim = parse(key, v)?,
            "grid.N" => self.n = parse(key, v)?,
            "grid.L" => self.box_len = parse(key, v)?,
            "model.alpha" => self.alpha = parse(key, v)?,
            "model.beta" => self.beta = parse(key, v)?,
            "lorentz.q" => self.lorentz_q = parse(key, v)?,
            "lorentz.p" => self.lorentz_p = parse_opt(key, v)?,
            "horizon.T" => self.horizon = parse(key, v)?,
            "mesh.nodes" => self.mesh_intervals = parse(key, v)?,
            "mesh.grading" => self.mesh_grading = parse(key, v)?,
            "windows.J" => self.window_levels = parse(key, v)?,
            "windows.stride" => self.window_stride = parse_opt(key, v)?,
            "solver.max_iter" => self.max_iter = parse(key, v)?,
            "solver.tol" => self.stop_tol = parse(key, v)?,
            "solver.norm" => {
                self.norm_mode = match v {
                    "x" | "X" => NormMode::X,
                    "lorentz" => NormMode::Lorentz,
                    _ => return Err(FgnsError::config(key, "expected `x` or `lorentz`")),
                }
            }
            "solver.bisect" => self.bisect = parse(key, v)?,
            "quadrature.gamma" => self.quad_gamma = parse(key, v)?,
            "quadrature.panels" => self.quad_panels = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "eps" => self.eps_list = parse_list(key, v)?,
            "init.kind" => {
                self.init_kind = v.parse().map_err(|e: FgnsError| FgnsError::config(key, e.to_string()))?
            }
            "init.amplitude" => self.init_amplitude = parse(key, v)?,
            "bilinear.samples" => self.bilinear_samples = parse(key, v)?,
            "bilinear.constant" => self.bilinear_constant = parse_opt(key, v)?,
            "kernel.N" => self.kernel_n = parse(key, v)?,
            "kernel.L" => self.kernel_box = parse_opt(key, v)?,
            "kernel.t" => self.kernel_times = parse_list(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(FgnsError::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "grid.dim" => self.dim.to_string(),
            "grid.N" => self.n.to_string(),
            "grid.L" => self.box_len.to_string(),
            "model.alpha" => self.alpha.to_string(),
            "model.beta" => self.beta.to_string(),
            "lorentz.q" => self.lorentz_q.to_string(),
            "lorentz.p" => opt_text(&self.lorentz_p),
            "horizon.T" => self.horizon.to_string(),
            "mesh.nodes" => self.mesh_intervals.to_string(),
            "mesh.grading" => self.mesh_grading.to_string(),
            "windows.J" => self.window_levels.to_string(),
            "windows.stride" => opt_text(&self.window_stride),
            "solver.max_iter" => self.max_iter.to_string(),
            "solver.tol" => self.stop_tol.to_string(),
            "solver.norm" => match self.norm_mode {
                NormMode::X => "x".into(),
                NormMode::Lorentz => "lorentz".into(),
            },
            "solver.bisect" => self.bisect.to_string(),
            "quadrature.gamma" => self.quad_gamma.to_string(),
            "quadrature.panels" => self.quad_panels.to_string(),
            "seed" => self.seed.to_string(),
            "eps" => list_text(&self.eps_list),
            "init.kind" => self.init_kind.as_str().into(),
            "init.amplitude" => self.init_amplitude.to_string(),
            "bilinear.samples" => self.bilinear_samples.to_string(),
            "bilinear.constant" => opt_text(&self.bilinear_constant),
            "kernel.N" => self.kernel_n.to_string(),
            "kernel.L" => opt_text(&self.kernel_box),
            "kernel.t" => list_text(&self.kernel_times),
            "output.dir" => self.out_dir.display().to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                FgnsError::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            out.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(out)
    }

    /// Defaults, then the file (if any), then the overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            let text = fs::read_to_string(p)
                .map_err(|e| FgnsError::config("--config", format!("{}: {e}", p.display())))?;
            for (k, v) in Self::parse_text(&text)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; parsing it reproduces the configuration exactly.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    fn field<T>(key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            FgnsError::Config { .. } => e,
            other => FgnsError::config(key, other.to_string()),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.model()?;
        if self.norm_mode == NormMode::Lorentz {
            self.lorentz()?;
        }
        Self::field("horizon.T", crate::duhamel::TimeMesh::graded(self.horizon, self.mesh_intervals, self.mesh_grading))?;
        Self::field("quadrature.panels", QuadratureRule::new(self.quad_gamma, self.quad_panels))?;
        if self.max_iter == 0 {
            return Err(FgnsError::config("solver.max_iter", "must be >= 1"));
        }
        if !(self.stop_tol > 0.0) {
            return Err(FgnsError::config("solver.tol", "must be positive"));
        }
        if self.window_stride == Some(0) {
            return Err(FgnsError::config("windows.stride", "must be >= 1"));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(FgnsError::config("eps", "every epsilon must be positive"));
        }
        if !(self.init_amplitude >= 0.0) {
            return Err(FgnsError::config("init.amplitude", "must be nonnegative"));
        }
        if self.kernel_times.iter().any(|t| !(*t > 0.0)) {
            return Err(FgnsError::config("kernel.t", "kernel times must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        Self::field("grid.N", TorusGrid::new(self.dim, self.n, self.box_len))
    }

    pub fn model(&self) -> Result<ModelParams> {
        Self::field("model.beta", ModelParams::new(self.alpha, self.beta, self.dim))
    }

    pub fn lorentz(&self) -> Result<LorentzParams> {
        Self::field(
            "lorentz.p",
            match self.lorentz_p {
                Some(p) => LorentzParams::new(p, self.lorentz_q, self.beta, self.dim),
                None => LorentzParams::from_q(self.lorentz_q, self.beta, self.dim),
            },
        )
    }

    pub fn kernel_grid(&self) -> Result<KernelGrid> {
        Self::field(
            "kernel.N",
            KernelGrid::new(self.kernel_n, self.kernel_box.unwrap_or(2.0 * self.box_len), self.dim),
        )
    }

    pub fn picard(&self) -> Result<PicardConfig> {
        let mut c = PicardConfig::new(self.model()?);
        c.horizon = self.horizon;
        c.intervals = self.mesh_intervals;
        c.grading = self.mesh_grading;
        c.max_iter = self.max_iter;
        c.stop_tol = self.stop_tol;
        c.norm_mode = self.norm_mode;
        c.lorentz = self.lorentz().ok();
        c.window_levels = self.window_levels;
        c.window_stride = self.window_stride;
        c.rule = QuadratureRule::new(self.quad_gamma, self.quad_panels)?;
        c.bilinear_constant = self.bilinear_constant;
        c.bisect_horizon = self.bisect;
        Ok(c)
    }
}
