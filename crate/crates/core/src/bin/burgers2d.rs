fn main() {
    std::process::exit(burgers2d::cli::main_with_args(std::env::args_os()));
}
