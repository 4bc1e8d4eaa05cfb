use clap::Parser;

use blowup_lab::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("blowup-lab: {e}");
        std::process::exit(e.exit_code());
    }
}
