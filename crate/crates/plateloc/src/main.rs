use clap::Parser;

fn main() {
    let cli = plateloc::cli::Cli::parse();
    std::process::exit(plateloc::cli::run(cli));
}
