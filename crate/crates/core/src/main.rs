fn main() {
    std::process::exit(corpverify::cli::run(std::env::args_os()));
}
