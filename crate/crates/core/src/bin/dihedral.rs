use clap::Parser;

fn main() {
    let cli = dihedral::cli::Cli::parse();
    std::process::exit(dihedral::cli::main_with(&cli));
}
