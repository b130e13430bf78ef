use std::process::ExitCode;

use defectors::cli::{main_with, SEED_ENV};

fn main() -> ExitCode {
    let env_seed = std::env::var(SEED_ENV).ok();
    let code = main_with(std::env::args_os(), env_seed.as_deref());
    ExitCode::from(code as u8)
}
