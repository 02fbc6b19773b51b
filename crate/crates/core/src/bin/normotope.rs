use clap::Parser;
use normotope::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
