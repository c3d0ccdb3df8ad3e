fn main() {
    std::process::exit(qh_core::cli::run(std::env::args_os()));
}
