fn main() {
    std::process::exit(baxcount::cli::run());
}
