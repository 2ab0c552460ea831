use clap::Parser;

fn main() {
    let cli = gaitid::Cli::parse();
    if let Err(e) = gaitid::run(cli) {
        eprintln!("{}", e.to_json_line());
        std::process::exit(e.exit_code());
    }
}
