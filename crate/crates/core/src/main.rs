use std::process::ExitCode;

fn main() -> ExitCode {
    euler_lagrange::cli::run(std::env::args_os())
}
