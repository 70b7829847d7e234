use clap::Parser;

fn main() {
    let cli = revisos::cli::Cli::parse();
    std::process::exit(revisos::cli::main_with(cli));
}
