use clap::Parser;
use delayflux::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = execute(&cli, &mut stdout) {
        eprintln!("delayflux: {e}");
        std::process::exit(e.exit_code());
    }
}
