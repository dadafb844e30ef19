// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stokes_interface::cli::{self, RunConfig};
use stokes_interface::snapshot;

#[derive(Parser)]
#[command(name = "stokes-interface", version, about = "Gravity Stokes interface simulator")]
struct Args {
    /// Override the config's worker count (1 gives a single-threaded run).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Replay the invariant checks on the outputs of a finished run.
    Verify { config: PathBuf },
    /// Write a named preset as a snapshot CSV.
    PresetDump {
        name: String,
        #[arg(long, default_value_t = 1024)]
        m: usize,
        /// Output path; defaults to `<name>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf, threads: Option<usize>) -> Result<RunConfig, i32> {
    let mut cfg = RunConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        cli::EXIT_CONFIG
    })?;
    if threads.is_some() {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn dispatch(args: Args) -> Result<i32, i32> {
    match args.command {
        Command::Run { config } => {
            let cfg = load(&config, args.threads)?;
            match cli::run(&cfg) {
                Ok(status) => {
                    match &status.failure {
                        None => println!("completed {} samples", status.samples),
                        Some(f) => eprintln!(
                            "run stopped at t = {} after {} samples: {f}",
                            status.t_reached.unwrap_or(0.0),
                            status.samples
                        ),
                    }
                    Ok(status.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Err(cli::error_exit_code(&e))
                }
            }
        }
        Command::Verify { config } => {
            let cfg = load(&config, args.threads)?;
            match cli::verify(&cfg) {
                Ok(report) => {
                    print!("{}", report.render());
                    Ok(report.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Err(cli::EXIT_CONFIG)
                }
            }
        }
        Command::PresetDump { name, m, out } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
            let res = cli::preset_snapshot(&name, m)
                .and_then(|s| snapshot::write_snapshot(&out, &s));
            match res {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    Ok(cli::EXIT_OK)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Err(cli::EXIT_CONFIG)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let code = dispatch(args).unwrap_or_else(|c| c);
    ExitCode::from(code as u8)
}
