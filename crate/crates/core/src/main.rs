fn main() {
    std::process::exit(mrfpic::cli::run());
}
