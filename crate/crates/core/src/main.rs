fn main() {
    std::process::exit(boxbound::cli::run(std::env::args_os()));
}
