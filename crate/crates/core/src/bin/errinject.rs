fn main() {
    std::process::exit(errinject::cli::main_with_args(std::env::args_os()));
}
