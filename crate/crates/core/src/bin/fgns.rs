use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fgns::config::ExperimentConfig;
use fgns::experiment::{run, Command};
use fgns::FgnsError;

#[derive(Parser, Debug)]
#[command(name = "fgns", version, about = "Pseudo-spectral fractional Navier-Stokes lab")]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (config key `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long = "grid.N", global = true)]
    grid_n: Option<String>,
    #[arg(long = "model.alpha", global = true)]
    alpha: Option<String>,
    #[arg(long = "model.beta", global = true)]
    beta: Option<String>,
    #[arg(long = "lorentz.p", global = true)]
    lorentz_p: Option<String>,
    #[arg(long = "lorentz.q", global = true)]
    lorentz_q: Option<String>,
    #[arg(long = "horizon.T", global = true)]
    horizon: Option<String>,
    /// Comma-separated list of mollifier radii.
    #[arg(long, global = true)]
    eps: Option<String>,
    /// Any config key, `--set key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Write the configured initial data to `u0.fgns`.
    Init,
    /// Picard iteration for the mild solution; writes the trace and trajectory.
    SolveMild {
        /// Snapshot to start from instead of the configured initial data.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solve the mollified problem at the first `--eps` value.
    SolveMollified {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Mollified solves for every `--eps`, measured against the mild solution.
    CompareEps {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Norms of a snapshot file or a trajectory directory.
    Norms {
        #[arg(long)]
        input: PathBuf,
    },
    /// Empirical checks of the pointwise and space-time Lorentz bounds.
    VerifyInequalities,
    /// Heat and Oseen kernel tables with decay and norm constants.
    KernelTable,
    /// `t^{1/p}` times the weak `L^q` norm along a solution or saved trajectory.
    DecayProfile {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

impl Overrides {
    fn pairs(&self) -> Result<Vec<(String, String)>, FgnsError> {
        let mut out = Vec::new();
        let named = [
            ("seed", &self.seed),
            ("grid.N", &self.grid_n),
            ("model.alpha", &self.alpha),
            ("model.beta", &self.beta),
            ("lorentz.p", &self.lorentz_p),
            ("lorentz.q", &self.lorentz_q),
            ("horizon.T", &self.horizon),
            ("eps", &self.eps),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        if let Some(p) = &self.out {
            out.push(("output.dir".into(), p.display().to_string()));
        }
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| FgnsError::Config {
                key: "--set".into(),
                message: format!("expected key=value, got `{s}`"),
            })?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn command(sub: Sub) -> Command {
    match sub {
        Sub::Init => Command::Init,
        Sub::SolveMild { input } => Command::SolveMild { input },
        Sub::SolveMollified { input } => Command::SolveMollified { epsilon: None, input },
        Sub::CompareEps { input } => Command::CompareEps { input },
        Sub::Norms { input } => Command::Norms { input },
        Sub::VerifyInequalities => Command::VerifyInequalities,
        Sub::KernelTable => Command::KernelTable,
        Sub::DecayProfile { input } => Command::DecayProfile { input },
    }
}

fn init_threads() -> Result<(), FgnsError> {
    let Ok(v) = std::env::var("FGNS_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| FgnsError::Config {
        key: "FGNS_THREADS".into(),
        message: format!("cannot parse `{v}`"),
    })?;
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| FgnsError::Config {
            key: "FGNS_THREADS".into(),
            message: e.to_string(),
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads()
        .and_then(|_| cli.opts.pairs())
        .and_then(|pairs| ExperimentConfig::load(cli.opts.config.as_deref(), &pairs))
        .and_then(|cfg| run(&cfg, &command(cli.cmd)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fgns: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
