fn main() {
    std::process::exit(cylas_cli::run(std::env::args_os()));
}
