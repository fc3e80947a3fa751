fn main() {
    std::process::exit(wavemark::cli::run());
}
