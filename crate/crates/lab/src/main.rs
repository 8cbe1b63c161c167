fn main() {
    std::process::exit(sagqg::cli::run(std::env::args_os()));
}
