fn main() {
    std::process::exit(artout::cli::main_with_args(std::env::args_os()));
}
