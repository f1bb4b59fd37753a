fn main() {
    std::process::exit(padicell::cli::main_from_env());
}
