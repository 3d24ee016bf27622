use clap::Parser;

fn main() {
    let cli = fman::cli::Cli::parse();
    std::process::exit(i32::from(fman::cli::run(cli)));
}
