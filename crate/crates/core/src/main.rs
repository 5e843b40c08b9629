fn main() {
    std::process::exit(maxbisect::cli::run(std::env::args()));
}
