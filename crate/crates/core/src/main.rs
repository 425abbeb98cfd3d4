fn main() {
    std::process::exit(zeta_detect::cli::run(std::env::args_os()));
}
