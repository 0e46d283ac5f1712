use clap::Parser;
use magic_sre::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
