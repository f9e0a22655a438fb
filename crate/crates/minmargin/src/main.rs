use clap::Parser;
use minmargin::cli::Cli;

fn main() {
    if let Err(error) = Cli::parse().execute() {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
