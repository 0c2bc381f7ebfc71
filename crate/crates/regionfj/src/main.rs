fn main() {
    std::process::exit(regionfj::cli::run(std::env::args_os()));
}
