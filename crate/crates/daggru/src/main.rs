use std::process::ExitCode;

fn main() -> ExitCode {
    daggru::cli::main()
}
