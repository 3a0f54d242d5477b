use std::process::ExitCode;

fn main() -> ExitCode {
    match hgd::cli::parse_args(std::env::args_os()) {
        Ok(command) => ExitCode::from(hgd::cli::execute(&command) as u8),
        Err(e) => e.exit(),
    }
}
