fn main() {
    std::process::exit(deficiency::cli::main_with_args(std::env::args_os()));
}
