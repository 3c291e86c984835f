fn main() {
    std::process::exit(incades::cli::main_with(std::env::args_os()));
}
