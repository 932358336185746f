use clap::Parser;

use edge_placer::{exit_code_for, run_cli, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run_cli(&cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code_for(&err));
    }
}
