fn main() {
    std::process::exit(bethe_cli::run(std::env::args_os()));
}
