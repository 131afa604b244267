// SPDX-License-Identifier: Apache-2.0

use clap::Parser;
use trojanlens_cli::{exit, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::exit_code(&e)
        }
    };
    std::process::exit(code);
}
