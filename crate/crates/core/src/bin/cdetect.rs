use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    constraint_detect::cli::init_logging();
    let code = constraint_detect::cli::run(
        std::env::args_os(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
