fn main() {
    std::process::exit(lumirend::cli::main_with(std::env::args().collect()));
}
