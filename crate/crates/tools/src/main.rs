fn main() {
    std::process::exit(straus_tools::cli::run());
}
