fn main() {
    std::process::exit(polyprg::cli::run(std::env::args_os()));
}
