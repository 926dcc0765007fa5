use std::process::ExitCode;

fn main() -> ExitCode {
    onebit_rip_cli::main_with_args(std::env::args_os())
}
