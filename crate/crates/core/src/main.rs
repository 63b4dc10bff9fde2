use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pencil_bec::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if out.cache_hit {
                eprintln!("note: served from cache");
            }
            if cli.output.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                    return ExitCode::from(4);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
