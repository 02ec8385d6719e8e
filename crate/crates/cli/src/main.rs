use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "rse1d", version, about = "Resonant state expansion for 1D delta-spike potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the tasks of a scenario file
    Run {
        /// TOML scenario
        config: PathBuf,
    },
    /// Re-check the outputs listed next to a run.json
    Verify {
        run_json: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    rse1d_cli::init_threads();
    let result = match &cli.command {
        Command::Run { config } => rse1d_cli::run(config).map(|(_, written)| {
            for p in written {
                println!("{}", p.display());
            }
        }),
        Command::Verify { run_json } => rse1d_cli::verify::verify(run_json).map(|report| {
            for (file, n) in report.checked {
                println!("{file}: {n} rows ok");
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
