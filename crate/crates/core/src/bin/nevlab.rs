fn main() {
    std::process::exit(nevlab::cli::main_with_args(std::env::args_os()));
}
