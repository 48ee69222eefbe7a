use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    if let Err(e) = lensrr_cli::init_threads() {
        eprintln!("error: {}", e.0);
        return ExitCode::from(lensrr_cli::EXIT_USAGE as u8);
    }
    let (out, err, code) = lensrr_cli::main_with(std::env::args_os());
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    ExitCode::from(code as u8)
}
