fn main() {
    std::process::exit(cryosim::cli::run(std::env::args_os()));
}
