use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use comanip_core::Execution;

mod analyze;
mod commands;
mod serve;

/// Co-manipulation simulator and benchmark harness.
#[derive(Debug, Parser)]
#[command(name = "comanip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Execution {
    fn from(e: ExecArg) -> Self {
        match e {
            ExecArg::Sequential => Execution::Sequential,
            ExecArg::Parallel => Execution::Parallel,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count the task orderings that stay inside the workspace.
    Enumerate {
        /// Workspace half-width in metres.
        #[arg(long, default_value_t = 1.0)]
        workspace: f64,
        /// Write the set library as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
        exec: ExecArg,
    },
    /// Run a scripted-leader session and write traces plus session.json.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sets: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
        exec: ExecArg,
    },
    /// Summarize one run, or compare two, against the reference tables.
    Analyze {
        /// Run directory; give twice to compare two conditions.
        #[arg(long, required = true, num_args = 1)]
        runs: Vec<PathBuf>,
        /// `builtin` or a path to a reference table JSON file.
        #[arg(long, default_value = "builtin")]
        reference: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bonferroni family size.
        #[arg(long, default_value_t = comanip_core::report::DEFAULT_FAMILY_SIZE)]
        family_size: usize,
    },
    /// Host a live session over a websocket at `/ws`.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        time_scale: f64,
        #[arg(long, default_value_t = 30.0)]
        broadcast_hz: f64,
        /// Seconds between `start_set` and the first task.
        #[arg(long, default_value_t = 3.0)]
        countdown: f64,
        /// Export traces of each finished set under this directory.
        #[arg(long)]
        export_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COMANIP_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Enumerate {
            workspace,
            out,
            exec,
        } => commands::enumerate(workspace, out.as_deref(), exec.into()),
        Command::Simulate {
            config,
            sets,
            seed,
            out,
            exec,
        } => commands::simulate(config.as_deref(), sets, seed, &out, exec.into()),
        Command::Analyze {
            runs,
            reference,
            out,
            family_size,
        } => analyze::run(&runs, &reference, out.as_deref(), family_size),
        Command::Serve {
            host,
            port,
            config,
            time_scale,
            broadcast_hz,
            countdown,
            export_dir,
        } => serve::run(serve::ServeOptions {
            host,
            port,
            config,
            time_scale,
            broadcast_hz,
            countdown,
            export_dir,
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::exit_code(&e)
        }
    }
}
