use clap::Parser;

fn main() {
    let cli = lo1d_cli::Cli::parse();
    std::process::exit(lo1d_cli::run(&cli));
}
