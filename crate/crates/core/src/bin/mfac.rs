use std::process::ExitCode;

fn main() -> ExitCode {
    match mfac::cli::run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_guard() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
