fn main() {
    std::process::exit(riverguard::cli::run(std::env::args_os()));
}
