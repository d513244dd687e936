fn main() {
    std::process::exit(macgame::cli::main_with_args(std::env::args_os()));
}
