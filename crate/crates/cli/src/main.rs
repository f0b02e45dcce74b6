use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = areole::run_args(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
