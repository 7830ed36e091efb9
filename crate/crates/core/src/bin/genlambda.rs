fn main() {
    std::process::exit(genlambda::cli::run(std::env::args_os()));
}
