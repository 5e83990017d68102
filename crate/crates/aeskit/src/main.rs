fn main() {
    std::process::exit(aeskit::cli::run(std::env::args_os()));
}
