fn main() {
    std::process::exit(dslift_cli::run(std::env::args_os()));
}
