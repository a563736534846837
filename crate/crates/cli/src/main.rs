use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(anneal_cli::run(std::env::args_os()))
}
