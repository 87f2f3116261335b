fn main() {
    std::process::exit(loewner::cli::main_with_args(std::env::args_os()));
}
