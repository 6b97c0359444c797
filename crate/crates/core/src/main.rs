use clap::Parser;

fn main() {
    let cli = xx0_qec::cli::Cli::parse();
    if let Err(e) = xx0_qec::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
