use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    bifrac::cli::configure_threads();
    ExitCode::from(bifrac::cli::run_command(std::env::args_os()))
}
