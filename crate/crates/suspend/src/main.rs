use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let max_l = std::env::var("SUSPEND_MAX_L")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok());
    let out = suspend::cli::run_args(std::env::args_os(), max_l);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.text.as_bytes());
    let _ = stdout.flush();
    ExitCode::from(out.code as u8)
}
