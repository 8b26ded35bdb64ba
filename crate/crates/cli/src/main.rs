use std::process::ExitCode;

use clap::Parser;
use rfde_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if let Some(r) = &outcome.report {
                for c in r.checks.iter().filter(|c| !c.pass) {
                    eprintln!("FAIL {}: lhs = {:e}, rhs = {:e}, tol = {:e}", c.check, c.lhs, c.rhs, c.tol);
                }
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
