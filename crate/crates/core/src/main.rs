use std::process::ExitCode;

fn main() -> ExitCode {
    lorawan_lab::cli::main_with_args(std::env::args_os())
}
