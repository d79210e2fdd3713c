use std::process::ExitCode;

fn main() -> ExitCode {
    vmifs::cli::run(std::env::args_os())
}
