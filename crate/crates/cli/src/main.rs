use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhosc_cli::{compare_files, pt_check_file, run_many, CliError};

#[derive(Parser)]
#[command(name = "nhosc", version, about = "Non-Hermitian oscillator scenarios: exact vs numerical propagation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files. Exit 0 if every task passes, 1 on a
    /// tolerance failure, 2 on a configuration error.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Scenario files run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Distances between two wavefunction dumps on the same grid.
    Compare { a: PathBuf, b: PathBuf },
    /// PT classification of a parameter file on [-T, T].
    PtCheck {
        params: PathBuf,
        #[arg(long)]
        window: f64,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenarios, out, jobs } => {
            let mut code = 0;
            for (path, result) in scenarios.iter().zip(run_many(&scenarios, &out, jobs)) {
                match result {
                    Ok(report) => {
                        for t in &report.tasks {
                            let mark = if t.passed { "PASS" } else { "FAIL" };
                            println!("{}: [{}] {} {mark}: {}", path.display(), t.index, t.task, t.detail);
                        }
                        for t in report.failures() {
                            eprintln!("{}: task {} ({}) failed: {}", path.display(), t.index, t.task, t.detail);
                        }
                        code = code.max(report.exit_code);
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        code = code.max(e.exit_code());
                    }
                }
            }
            ExitCode::from(code as u8)
        }
        Command::Compare { a, b } => match compare_files(&a, &b) {
            Ok(m) => {
                println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::PtCheck { params, window } => match pt_check_file(&params, window) {
            Ok(class) => {
                println!("{}", serde_json::to_string_pretty(&class).expect("class serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
