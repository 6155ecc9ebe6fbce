fn main() {
    std::process::exit(smile_moments_cli::run(std::env::args_os()));
}
