use clap::Parser;
use spectral_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (code, text) = run(&cli);
    print!("{text}");
    std::process::exit(code);
}
