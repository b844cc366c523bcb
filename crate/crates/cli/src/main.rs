use clap::Parser;

fn main() {
    let cli = pointtrap_cli::Cli::parse();
    std::process::exit(pointtrap_cli::run(cli));
}
