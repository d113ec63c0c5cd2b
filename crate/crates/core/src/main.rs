fn main() {
    std::process::exit(agc::cli::main_with_args(std::env::args_os()));
}
