use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = io::BufWriter::new(io::stdout().lock());
    let mut stderr = io::stderr().lock();
    let mut code = treepersist::cli::run(std::env::args_os(), &mut stdout, &mut stderr);
    if stdout.flush().is_err() && code == 0 {
        code = 1;
    }
    ExitCode::from(code as u8)
}
