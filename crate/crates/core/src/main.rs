fn main() {
    std::process::exit(sancdyn::cli::run(std::env::args_os()));
}
