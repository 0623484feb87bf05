fn main() {
    std::process::exit(multipoly::cli::run(std::env::args_os()));
}
