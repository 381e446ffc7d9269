use clap::Parser;

fn main() {
    let cli = llll::cli::Cli::parse();
    std::process::exit(llll::cli::run(cli));
}
