fn main() {
    std::process::exit(pconvex::cli::run(std::env::args_os()));
}
