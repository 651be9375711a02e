fn main() {
    std::process::exit(early_benefit::cli::run(std::env::args_os()));
}
