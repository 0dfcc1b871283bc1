fn main() {
    std::process::exit(hdrelay::cli::main_with_args(std::env::args_os()));
}
