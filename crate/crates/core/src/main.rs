fn main() {
    std::process::exit(gfswe::cli::main_with_args(std::env::args_os()));
}
