use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = etaq_cli::run(std::env::args_os());
    let text = result.text.as_bytes();
    let _ = if result.exit_code == etaq_cli::EXIT_OK {
        std::io::stdout().write_all(text)
    } else {
        std::io::stderr().write_all(text)
    };
    ExitCode::from(result.exit_code as u8)
}
