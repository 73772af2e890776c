fn main() {
    std::process::exit(cubecode::cli::run(std::env::args().collect()));
}
