fn main() {
    std::process::exit(two_squares_cli::run(std::env::args_os()));
}
