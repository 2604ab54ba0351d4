fn main() {
    std::process::exit(cartconv::cli::run());
}
