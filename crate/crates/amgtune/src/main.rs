fn main() {
    std::process::exit(amgtune::cli::main_with(std::env::args_os()));
}
