use clap::Parser;

fn main() {
    let cli = fkmg::cli::Cli::parse();
    let code = fkmg::cli::run(cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
