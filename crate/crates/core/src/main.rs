fn main() {
    std::process::exit(phirad::cli::run());
}
