use std::process::ExitCode;

fn main() -> ExitCode {
    let code = sqn::cli::main_with_args(std::env::args().collect());
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
