fn main() {
    std::process::exit(sidonbench::cli::run(std::env::args_os()));
}
