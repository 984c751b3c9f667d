use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hblcert::cli::{run_and_render, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (code, output) = run_and_render(&cli);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(output.as_bytes());
    ExitCode::from(code as u8)
}
