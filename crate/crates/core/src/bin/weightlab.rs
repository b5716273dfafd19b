fn main() {
    std::process::exit(weightlab::cli::main_with_args(std::env::args_os()));
}
