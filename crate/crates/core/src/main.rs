fn main() {
    std::process::exit(threshscatter::cli::main_with_args(std::env::args_os()));
}
