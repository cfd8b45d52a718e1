fn main() {
    std::process::exit(spacelink::cli::main_with_args(std::env::args_os()));
}
