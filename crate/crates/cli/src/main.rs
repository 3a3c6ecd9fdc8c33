use clap::Parser;

fn main() {
    let cli = lindcert_cli::Cli::parse();
    std::process::exit(lindcert_cli::run(cli));
}
