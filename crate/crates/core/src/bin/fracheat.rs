use clap::Parser;

fn main() {
    let cli = fracheat::cli::Cli::parse();
    std::process::exit(fracheat::cli::main_with(cli));
}
