fn main() {
    std::process::exit(bisyz::cli::run(std::env::args_os()));
}
