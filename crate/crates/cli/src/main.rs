use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scstat::generate::{self, Family};
use scstat::run::{execute, write_outputs, RunError};

#[derive(Parser)]
#[command(name = "scstat", version, about = "Solve grid MDPs and check comparative statics on them")]
struct Cli {
    /// Override the config's inequality tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the config's horizon T.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Worker threads for solving parameter points.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks described by a config file.
    Run { config: PathBuf },
    /// Write seeded random instance configs.
    Generate {
        #[arg(value_enum)]
        family: Family,
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn run(cli: &Cli, path: &PathBuf) -> Result<i32, RunError> {
    let mut cfg = scstat::config::load(path)?;
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(h) = cli.horizon {
        cfg.horizon = h;
    }
    let outcome = execute(&cfg, cli.jobs)?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    write_outputs(&outcome, &base)?;
    for c in &outcome.report.checks {
        println!("{:<16} {:?} {:?}", c.check.name, c.params, c.check.status);
    }
    let s = &outcome.report.summary;
    println!("confirmed {} preconditions_failed {} refuted {}", s.confirmed, s.preconditions_failed, s.refuted);
    Ok(s.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run { config } => match run(&cli, config) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Generate { family, count, seed, out } => {
            match generate::write_all(&generate::generate(*family, *count, *seed), out) {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    3
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
