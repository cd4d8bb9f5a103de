fn main() {
    std::process::exit(hypifs_cli::run(std::env::args_os()));
}
