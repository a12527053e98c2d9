use std::process::ExitCode;

fn main() -> ExitCode {
    contrarian_cli::main_with(std::env::args_os())
}
