use clap::Parser;

use wbasn_sim::cli::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
