use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qalloc_cli::run(std::env::args_os()))
}
