use std::process::ExitCode;

fn main() -> ExitCode {
    qloan_cli::cli::run(std::env::args_os())
}
