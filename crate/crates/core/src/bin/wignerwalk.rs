fn main() {
    std::process::exit(wignerwalk::cli::main_with_args(std::env::args_os()));
}
