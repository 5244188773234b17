fn main() {
    std::process::exit(xi_lab::cli::main_with_args(std::env::args_os()));
}
