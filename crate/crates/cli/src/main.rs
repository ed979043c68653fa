mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum Fail {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] stratwave::Error),
    #[error("branch ended before a stagnation threshold: {0}")]
    BranchEnded(String),
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    /// The branch reached a stagnation or ellipticity threshold.
    StagnationStop,
}

#[derive(Parser, Debug)]
#[command(
    name = "stratwave",
    version,
    about = "Stratified solitary waves with shear"
)]
struct Cli {
    /// Run configuration (TOML); every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Background file, overriding the config.
    #[arg(long, global = true)]
    background: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel diagnostics and ε sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    #[arg(long)]
    nq: Option<usize>,
    /// Rows per layer (sets both layers).
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    np_minus: Option<usize>,
    #[arg(long)]
    np_plus: Option<usize>,
    /// Domain half-length; 0 for the automatic choice.
    #[arg(long = "length")]
    l: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct NewtonArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical Froude number and the Sturm-Liouville spectrum.
    Critical {
        #[arg(long)]
        count: Option<usize>,
    },
    /// Reduced-model coefficients and seed fields.
    Reduced {
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        normalization: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Newton solve at one or more amplitudes.
    Solve {
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        froude: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        newton: NewtonArgs,
    },
    /// Pseudo-arclength continuation of the wave branch.
    Continue {
        #[arg(long)]
        eps_start: Option<f64>,
        #[arg(long)]
        eps_second: Option<f64>,
        #[arg(long)]
        ds_init: Option<f64>,
        #[arg(long)]
        ds_min: Option<f64>,
        #[arg(long)]
        ds_max: Option<f64>,
        #[arg(long)]
        min_hp_stop: Option<f64>,
        #[arg(long)]
        sup_hp_stop: Option<f64>,
        #[arg(long)]
        max_points: Option<usize>,
        /// Extend the branch already in the output directory.
        #[arg(long)]
        resume: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        newton: NewtonArgs,
    },
    /// Report on a single field file.
    Diagnose {
        #[arg(long)]
        field: PathBuf,
    },
    /// Summary CSV for a directory of field files.
    DiagnoseBranch {
        /// Defaults to `<out>/branch`.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Eulerian interfaces and streamlines of a field file.
    Reconstruct {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        dimensional: bool,
        #[arg(long)]
        p_atm: Option<f64>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl GridArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.grid.nq, self.nq);
        set(&mut c.grid.np_minus, self.np);
        set(&mut c.grid.np_plus, self.np);
        set(&mut c.grid.np_minus, self.np_minus);
        set(&mut c.grid.np_plus, self.np_plus);
        set(&mut c.grid.l, self.l);
    }
}

impl NewtonArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.newton.tol, self.tol);
        set(&mut c.newton.max_iter, self.max_iter);
    }
}

/// Merges file, global flags and subcommand flags into the effective config.
fn effective(cli: Cli) -> Result<(RunConfig, commands::Task), Fail> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    set(&mut c.background, cli.background);
    set(&mut c.out, cli.out);
    set(&mut c.jobs, cli.jobs);
    let task = match cli.command {
        Command::Critical { count } => {
            set(&mut c.critical.count, count);
            commands::Task::Critical
        }
        Command::Reduced {
            eps,
            normalization,
            grid,
        } => {
            set(&mut c.solve.eps, eps);
            set(&mut c.normalization, normalization);
            grid.apply(&mut c);
            commands::Task::Reduced
        }
        Command::Solve {
            eps,
            froude,
            grid,
            newton,
        } => {
            set(&mut c.solve.eps, eps);
            set(&mut c.solve.froude, froude);
            grid.apply(&mut c);
            newton.apply(&mut c);
            commands::Task::Solve
        }
        Command::Continue {
            eps_start,
            eps_second,
            ds_init,
            ds_min,
            ds_max,
            min_hp_stop,
            sup_hp_stop,
            max_points,
            resume,
            grid,
            newton,
        } => {
            let k = &mut c.continuation;
            set(&mut k.eps_start, eps_start);
            set(&mut k.eps_second, eps_second);
            set(&mut k.ds_init, ds_init);
            set(&mut k.ds_min, ds_min);
            set(&mut k.ds_max, ds_max);
            set(&mut k.min_hp_stop, min_hp_stop);
            set(&mut k.sup_hp_stop, sup_hp_stop);
            set(&mut k.max_points, max_points);
            grid.apply(&mut c);
            newton.apply(&mut c);
            commands::Task::Continue { resume }
        }
        Command::Diagnose { field } => commands::Task::Diagnose { field },
        Command::DiagnoseBranch { dir } => commands::Task::DiagnoseBranch { dir },
        Command::Reconstruct {
            field,
            dimensional,
            p_atm,
        } => {
            c.reconstruct.dimensional |= dimensional;
            set(&mut c.reconstruct.p_atm, p_atm);
            commands::Task::Reconstruct { field }
        }
    };
    c.validate()?;
    Ok((c, task))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = effective(cli).and_then(|(cfg, task)| commands::run(&cfg, &task));
    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::StagnationStop) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Fail::Config(_) => ExitCode::from(2),
                Fail::Numerical(_) | Fail::BranchEnded(_) => ExitCode::from(3),
            }
        }
    }
}
