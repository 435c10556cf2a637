//! The `gardner` command line: analytic capacity curves, Monte Carlo
//! feasibility sweeps and pattern-storage demos, each run recorded in a
//! replayable manifest.

pub mod commands;
pub mod manifest;
pub mod params;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::commands::Emitted;
use crate::manifest::{default_manifest_path, RunManifest};
use crate::params::{
    from_table, load_config, to_table, AlphaHatArgs, CapacityArgs, DynamicsArgs, FigureArgs,
    SweepArgs,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const WORKERS_ENV: &str = "GARDNER_WORKERS";

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

/// Set by the Ctrl-C handler; a running sweep stops starting new trials.
pub fn interrupt_flag() -> &'static AtomicBool {
    &INTERRUPTED
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gardner_core::Error),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("interrupted; partial results written")]
    Interrupted,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(gardner_core::Error::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gardner",
    version,
    about = "Spherical perceptron storage capacity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunOpts {
    /// TOML parameter file; flags override it. A run manifest also works.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Manifest path [default: <output>.manifest.toml].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Worker threads [default: $GARDNER_WORKERS, else all cores].
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic capacity α_c(κ), optionally for biased patterns.
    Capacity {
        #[command(flatten)]
        args: CapacityArgs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// CSV of α_c against κ for several m_a.
    FigureAlpha {
        #[command(flatten)]
        args: FigureArgs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// CSV of κ_adj against κ for several m_a.
    FigureKadj {
        #[command(flatten)]
        args: FigureArgs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Monte Carlo feasibility probability along an α grid.
    Sweep {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Empirical capacity: mean largest feasible m/n.
    AlphaHat {
        #[command(flatten)]
        args: AlphaHatArgs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Store random patterns, verify fixed points, test one-bit-flip recovery.
    DynamicsDemo {
        #[command(flatten)]
        args: DynamicsArgs,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Re-run a command from its manifest.
    Replay {
        manifest: PathBuf,
        /// Output file [default: the manifest's first output].
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Where to write the new manifest [default: <output>.manifest.toml].
        #[arg(long = "new-manifest")]
        new_manifest: Option<PathBuf>,
        /// Worker threads [default: $GARDNER_WORKERS, else all cores]. Results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Capacity { .. } => "capacity",
            Command::FigureAlpha { .. } => "figure-alpha",
            Command::FigureKadj { .. } => "figure-kadj",
            Command::Sweep { .. } => "sweep",
            Command::AlphaHat { .. } => "alpha-hat",
            Command::DynamicsDemo { .. } => "dynamics-demo",
            Command::Replay { .. } => "replay",
        }
    }
}

fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
    let workers = match flag {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::Usage(format!(
                    "{WORKERS_ENV} must be a positive integer, got {v:?}"
                ))
            })?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if workers == 0 {
        return Err(CliError::Usage("worker count must be >= 1".into()));
    }
    Ok(workers)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn file_table(run: &RunOpts, command: &str) -> Result<Option<toml::Table>, CliError> {
    run.config
        .as_deref()
        .map(|p| load_config(p, command))
        .transpose()
}

struct Finished<'a, P: Serialize> {
    command: &'a str,
    params: &'a P,
    seed: Option<u64>,
    emitted: Emitted,
}

fn finish<P: Serialize>(
    run: &RunOpts,
    workers: usize,
    started: Instant,
    done: Finished<'_, P>,
) -> Result<(), CliError> {
    let Finished {
        command,
        params,
        seed,
        emitted,
    } = done;
    let mut stdout = std::io::stdout().lock();
    let mut outputs = Vec::new();
    match &run.output {
        Some(path) => {
            write_file(path, &emitted.file)?;
            outputs.push(path.clone());
            let _ = stdout.write_all(emitted.display.as_bytes());
        }
        None if emitted.display.is_empty() => {
            let _ = stdout.write_all(emitted.file.as_bytes());
        }
        None => {
            let _ = stdout.write_all(emitted.display.as_bytes());
        }
    }
    let manifest_path = run
        .manifest
        .clone()
        .or_else(|| run.output.as_deref().map(default_manifest_path));
    if let Some(path) = manifest_path {
        RunManifest {
            command: command.to_string(),
            version: VERSION.to_string(),
            seed,
            outputs,
            workers,
            duration_seconds: started.elapsed().as_secs_f64(),
            interrupted: emitted.interrupted,
            params: to_table(params),
        }
        .write(&path)?;
    }
    if emitted.interrupted {
        return Err(CliError::Interrupted);
    }
    Ok(())
}

fn replay(
    manifest: &Path,
    output: Option<PathBuf>,
    new_manifest: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let m = RunManifest::read(manifest)?;
    if m.version != VERSION {
        eprintln!(
            "warning: manifest written by version {}, running {VERSION}",
            m.version
        );
    }
    let run = RunOpts {
        config: Some(manifest.to_path_buf()),
        output: output.or_else(|| m.outputs.first().cloned()),
        manifest: new_manifest,
        workers,
    };
    let command = match m.command.as_str() {
        "capacity" => Command::Capacity {
            args: CapacityArgs::default(),
            run,
        },
        "figure-alpha" => Command::FigureAlpha {
            args: FigureArgs::default(),
            run,
        },
        "figure-kadj" => Command::FigureKadj {
            args: FigureArgs::default(),
            run,
        },
        "sweep" => Command::Sweep {
            args: SweepArgs::default(),
            run,
        },
        "alpha-hat" => Command::AlphaHat {
            args: AlphaHatArgs::default(),
            run,
        },
        "dynamics-demo" => Command::DynamicsDemo {
            args: DynamicsArgs::default(),
            run,
        },
        other => return Err(CliError::Usage(format!("cannot replay command `{other}`"))),
    };
    execute(command)
}

/// Runs one parsed command.
pub fn execute(command: Command) -> Result<(), CliError> {
    let name = command.name();
    let started = Instant::now();
    match command {
        Command::Replay {
            manifest,
            output,
            new_manifest,
            workers,
        } => replay(&manifest, output, new_manifest, workers),
        Command::Capacity { args, run } => {
            let p = args.resolve(from_table(file_table(&run, name)?)?)?;
            let emitted = commands::capacity(&p)?;
            finish(
                &run,
                1,
                started,
                Finished {
                    command: name,
                    params: &p,
                    seed: None,
                    emitted,
                },
            )
        }
        Command::FigureAlpha { args, run } => {
            let p = args.resolve(from_table(file_table(&run, name)?)?)?;
            let emitted = commands::figure_alpha(&p)?;
            finish(
                &run,
                1,
                started,
                Finished {
                    command: name,
                    params: &p,
                    seed: None,
                    emitted,
                },
            )
        }
        Command::FigureKadj { args, run } => {
            let p = args.resolve(from_table(file_table(&run, name)?)?)?;
            let emitted = commands::figure_kadj(&p)?;
            finish(
                &run,
                1,
                started,
                Finished {
                    command: name,
                    params: &p,
                    seed: None,
                    emitted,
                },
            )
        }
        Command::Sweep { args, run } => {
            let p = args.resolve(from_table(file_table(&run, name)?)?)?;
            let workers = resolve_workers(run.workers)?;
            let pool = thread_pool(workers)?;
            let (emitted, _) = pool.install(|| commands::sweep(&p, interrupt_flag()))?;
            finish(
                &run,
                workers,
                started,
                Finished {
                    command: name,
                    params: &p,
                    seed: Some(p.seed),
                    emitted,
                },
            )
        }
        Command::AlphaHat { args, run } => {
            let p = args.resolve(from_table(file_table(&run, name)?)?)?;
            let workers = resolve_workers(run.workers)?;
            let pool = thread_pool(workers)?;
            let emitted = pool.install(|| commands::alpha_hat(&p))?;
            finish(
                &run,
                workers,
                started,
                Finished {
                    command: name,
                    params: &p,
                    seed: Some(p.seed),
                    emitted,
                },
            )
        }
        Command::DynamicsDemo { args, run } => {
            let p = args.resolve(from_table(file_table(&run, name)?)?)?;
            let emitted = commands::dynamics_demo(&p)?;
            finish(
                &run,
                1,
                started,
                Finished {
                    command: name,
                    params: &p,
                    seed: Some(p.seed),
                    emitted,
                },
            )
        }
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run_from_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
