use clap::Parser;

fn main() {
    let args = price_lab::cli::Args::parse();
    std::process::exit(price_lab::cli::main_with_args(args));
}
