use clap::Parser;
use infoflow::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    if let Err(e) = run(&cli, &mut out, &mut err) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
