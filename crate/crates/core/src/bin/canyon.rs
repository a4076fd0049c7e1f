fn main() {
    std::process::exit(canyon::cli::main_with_args(std::env::args_os()));
}
