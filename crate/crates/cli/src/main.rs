use std::process::ExitCode;

fn main() -> ExitCode {
    cgriff_cli::run_main()
}
