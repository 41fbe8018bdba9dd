use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use noonsim::cli::{self, config::ModeName, config::Overrides, CliError};

#[derive(Parser)]
#[command(
    name = "noonsim",
    version,
    about = "NOON-state synthesis on two resonators and a ladder qutrit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured protocol(s) and write report, trajectory and schedule.
    Run(Args),
    /// Check every boundary state against the oracle and conservation laws.
    Verify(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ideal,
    FiniteDetuning,
}

#[derive(clap::Args)]
struct Args {
    /// TOML config file.
    config: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Idle-resonator detuning in units of g1_ea.
    #[arg(long)]
    delta_over_g: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            m: self.m,
            mode: self.mode.map(|m| match m {
                ModeArg::Ideal => ModeName::Ideal,
                ModeArg::FiniteDetuning => ModeName::FiniteDetuning,
            }),
            delta_over_g: self.delta_over_g,
            out_dir: self.out_dir.clone(),
        }
    }
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("noonsim: {e}");
    exit(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let plan = match cli::load_plan(&args.config, &args.overrides()) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            match cli::run(&plan) {
                Ok(summary) => {
                    for row in &summary.rows {
                        println!(
                            "{}: final_fidelity {}",
                            row.name,
                            row.final_fidelity.map_or("n/a".into(), cli::output::fmt12)
                        );
                    }
                    println!("artifacts in {}", summary.out_dir.display());
                    exit(cli::EXIT_OK)
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify(args) => {
            let plan = match cli::load_plan(&args.config, &args.overrides()) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let reports = match cli::verify(&plan) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let mut failures = Vec::new();
            for r in &reports {
                print!("{}", cli::format_table(r));
                failures.extend(r.outcome.failures.iter().map(|f| format!("{}: {f}", r.job)));
            }
            if failures.is_empty() {
                println!("verify: pass");
                exit(cli::EXIT_OK)
            } else {
                for f in &failures {
                    eprintln!("  {f}");
                }
                fail(CliError::Physics(format!(
                    "{} check(s) failed",
                    failures.len()
                )))
            }
        }
    }
}
