fn main() {
    std::process::exit(nibbled_cli::run(std::env::args_os()));
}
