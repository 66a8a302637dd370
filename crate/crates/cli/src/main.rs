fn main() {
    std::process::exit(focuslab_cli::main_with_args(std::env::args_os()));
}
