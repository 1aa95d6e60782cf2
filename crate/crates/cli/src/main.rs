use clap::Parser;
use qglab_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qglab: {e}");
            1
        }
    };
    std::process::exit(code);
}
