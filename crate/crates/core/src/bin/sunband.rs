fn main() {
    std::process::exit(sunband::cli::run(std::env::args_os()));
}
