fn main() {
    std::process::exit(varalg::cli::main_with(std::env::args_os()));
}
