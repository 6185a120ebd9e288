use std::process::ExitCode;

use wconorm_cli::{run_command, CliError};

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match run_command(std::env::args_os(), &mut stdout) {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Usage(msg)) => {
            eprint!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
