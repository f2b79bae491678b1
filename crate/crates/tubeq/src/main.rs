use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tubeq::{init_threads, run, CliError, RunConfig, RunContext, Task};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Curvature,
    Potential,
    Spectrum,
    Squeeze,
    Verify,
}

impl From<Command> for Task {
    fn from(c: Command) -> Task {
        match c {
            Command::Curvature => Task::Curvature,
            Command::Potential => Task::Potential,
            Command::Spectrum => Task::Spectrum,
            Command::Squeeze => Task::Squeeze,
            Command::Verify => Task::Verify,
        }
    }
}

/// Constrained Schrödinger operators on curves and surfaces.
#[derive(Debug, Parser)]
#[command(name = "tubeq", version)]
struct Args {
    task: Command,

    /// JSON run configuration (optional for `verify`).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Also write the Hamiltonian as Matrix Market (`spectrum` only).
    #[arg(long)]
    dump_matrix: bool,
}

fn execute(args: Args) -> Result<Vec<PathBuf>, CliError> {
    init_threads()?;
    let task = Task::from(args.task);
    let (config, base) = match &args.config {
        Some(path) => (
            RunConfig::load(path)?,
            path.parent().map(PathBuf::from).unwrap_or_default(),
        ),
        None if task == Task::Verify => (RunConfig::from_json("{}")?, PathBuf::new()),
        None => return Err(CliError::Config { path: "--config".into(), message: "required for this task".into() }),
    };
    let ctx = RunContext { base, out: args.out, dump_matrix: args.dump_matrix };
    run(task, &config, &ctx)
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
