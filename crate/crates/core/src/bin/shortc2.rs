fn main() {
    std::process::exit(shortc2_core::cli::run(std::env::args_os()));
}
