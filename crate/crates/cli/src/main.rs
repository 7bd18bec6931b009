//! `disperse-lab`: batch driver for kernels, discrete groups, dispersive
//! estimates, small-data NLS runs and the verification suite.
//!
//! Every subcommand is translated into a versioned [`RunConfig`]; `run
//! --config file.json` executes a saved one. Exit status is 0 on success,
//! 1 on usage, configuration or numerical errors and 2 when a verified
//! bound fails or an NLS run is flagged as a blowup suspect.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, GroupOp, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] disperse_lab::Error),
    /// A verification failed or a run was flagged.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Lib(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "disperse-lab", version, about = "Dispersive estimates on hyperbolic spaces and their quotients")]
struct Cli {
    /// Write the resolved run configuration to this file before running.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file; `.csv` writes a table, anything else JSON. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Dump root data of the rank-one catalog (or one space).
    Lie {
        #[arg(long)]
        space: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Schrödinger kernel L^q norms and fitted pointwise constants.
    Kernel {
        #[arg(long, default_value = "H3")]
        space: String,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',')]
        t_list: Option<Vec<f64>>,
        #[arg(long)]
        q: Option<f64>,
        /// Radii sampled on [0, 8] for the pointwise fit.
        #[arg(long)]
        grid_n: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Operations on a discrete group read from a JSON file.
    Group {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, value_enum)]
        op: GroupOp,
        #[arg(long)]
        budget: Option<usize>,
        /// Orbit radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Poincaré exponent.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Word length for the growth function.
        #[arg(long)]
        n: Option<usize>,
        /// Tail tolerance of the automorphic kernel.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// L^q norms of the propagator kernel against Ψ(t), on X or on a quotient.
    Dispersive {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        q: Option<f64>,
        /// `a:b:steps`, log-spaced.
        #[arg(long)]
        t_range: Option<String>,
        /// Scale the bound by the fitted constant and report the decay slope.
        #[arg(long)]
        fit: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Log-log SVG of the measured norms.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Small-data power NLS from a Gaussian bump of L² norm `eps`.
    Nls {
        #[arg(long, default_value = "H3")]
        space: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Admissible pairs `p,q;p~,q~`.
        #[arg(long)]
        pairs: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the verification suite and print one line per check.
    VerifyAll {
        #[arg(long, default_value = "H3")]
        space: String,
        /// `key=value` settings of the suite, e.g. `decay_exponent=-1.0`.
        #[arg(long = "override")]
        overrides: Vec<String>,
        /// Comma-separated check ids (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<u8>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Execute a saved run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn assign_out(cfg: &mut RunConfig, out: OutArgs) {
    if let Some(p) = out.out {
        if p.extension().is_some_and(|e| e == "csv") {
            cfg.outputs.csv = Some(p);
        } else {
            cfg.outputs.json = Some(p);
        }
    }
}

fn to_config(sub: Sub) -> Result<RunConfig, CliError> {
    let cfg = match sub {
        Sub::Run { config } => return RunConfig::load(&config),
        Sub::Lie { space, out } => {
            let mut c = RunConfig::new(Command::Lie);
            c.space = space;
            assign_out(&mut c, out);
            c
        }
        Sub::Kernel { space, t_list, q, grid_n, out } => {
            let mut c = RunConfig::new(Command::Kernel);
            c.space = Some(space);
            c.params.t_list = t_list;
            c.params.q = q;
            c.params.grid_n = grid_n;
            assign_out(&mut c, out);
            c
        }
        Sub::Group {
            group,
            op,
            budget,
            radius,
            s,
            t,
            q,
            n,
            epsilon,
            samples,
            seed,
            out,
        } => {
            let mut c = RunConfig::new(Command::Group);
            c.group = Some(group);
            c.params.op = Some(op);
            c.params.budget = budget;
            c.params.radius = radius;
            c.params.s = s;
            c.params.t = t;
            c.params.q = q;
            c.params.n = n;
            c.params.epsilon = epsilon;
            c.params.samples = samples;
            c.seed = seed;
            assign_out(&mut c, out);
            c
        }
        Sub::Dispersive {
            space,
            group,
            q,
            t_range,
            fit,
            samples,
            seed,
            plot,
            out,
        } => {
            let mut c = RunConfig::new(Command::Dispersive);
            c.space = space;
            c.group = group;
            c.params.q = q;
            c.params.t_range = t_range;
            c.params.fit = fit;
            c.params.samples = samples;
            c.seed = seed;
            c.outputs.svg = plot;
            assign_out(&mut c, out);
            c
        }
        Sub::Nls {
            space,
            gamma,
            eps,
            t_final,
            dt,
            pairs,
            out,
        } => {
            let mut c = RunConfig::new(Command::Nls);
            c.space = Some(space);
            c.params.gamma = gamma;
            c.params.eps = eps;
            c.params.t_final = t_final;
            c.params.dt = dt;
            c.params.pairs = pairs;
            assign_out(&mut c, out);
            c
        }
        Sub::VerifyAll {
            space,
            overrides,
            checks,
            seed,
            out,
        } => {
            let mut c = RunConfig::new(Command::VerifyAll);
            c.space = Some(space);
            c.params.overrides = overrides;
            c.params.checks = checks;
            c.seed = seed;
            assign_out(&mut c, out);
            c
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DISPERSE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("DISPERSE_LAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    // clap exits with 2 on bad flags; usage errors here are 1.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|()| {
        let cfg = to_config(cli.command)?;
        if let Some(p) = &cli.save_config {
            let text = serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            std::fs::write(p, text + "\n").map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
        }
        commands::run(&cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("disperse-lab: {e}");
            ExitCode::from(e.code())
        }
    }
}
