use std::process::ExitCode;

use clap::Parser;
use conevol_cli::{exit_code, run, threads_from_env, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match threads_from_env(std::env::var("CONEVOL_THREADS").ok().as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
