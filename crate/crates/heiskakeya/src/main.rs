fn main() {
    std::process::exit(heiskakeya::cli::main_with_args(std::env::args_os()));
}
