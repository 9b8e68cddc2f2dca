use clap::Parser;
use phasesense_cli::cli::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = phasesense_cli::run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
