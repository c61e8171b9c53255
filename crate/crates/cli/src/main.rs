use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thermocp_cli::{output, Command};

/// Thermal Casimir-Polder forces above a planar surface.
#[derive(Parser, Debug)]
#[command(name = "thermocp", version)]
struct Args {
    /// Computation to run.
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory` in the scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative truncation tolerance for Matsubara sums.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match thermocp_cli::run(args.command, &args.config, args.out.as_deref(), args.tol, args.threads) {
        Ok(files) => {
            for f in files {
                if matches!(args.command, Command::Ratio | Command::Compare | Command::DiluteCheck) {
                    if let Ok((header, rows)) = output::read_csv(&f) {
                        println!("{}", header.join("\t"));
                        for r in rows {
                            println!("{}", r.join("\t"));
                        }
                    }
                }
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("thermocp {}: {e}", args.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
