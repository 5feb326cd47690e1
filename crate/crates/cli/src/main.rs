use clap::Parser;
use secord_cli::app::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("secord: {e}");
        std::process::exit(e.exit_code());
    }
}
