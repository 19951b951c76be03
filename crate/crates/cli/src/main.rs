fn main() {
    std::process::exit(epibroadcast_cli::run(std::env::args_os()));
}
