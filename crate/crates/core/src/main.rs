fn main() {
    std::process::exit(pgist::cli::run(std::env::args()));
}
