fn main() {
    std::process::exit(kspace::cli::run_subcommand(std::env::args_os()));
}
