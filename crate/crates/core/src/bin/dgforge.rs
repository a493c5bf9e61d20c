fn main() {
    std::process::exit(dgforge::cli::run(std::env::args_os()));
}
