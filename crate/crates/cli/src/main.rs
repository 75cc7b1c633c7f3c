//! `chernvan`: see the library docs of `chern_cli` for the subcommands.

fn main() {
    std::process::exit(chern_cli::run(std::env::args_os()));
}
