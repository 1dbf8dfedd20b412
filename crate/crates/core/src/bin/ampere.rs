fn main() {
    std::process::exit(ampere_core::cli::run(std::env::args_os()));
}
