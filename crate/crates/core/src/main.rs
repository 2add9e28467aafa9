fn main() {
    std::process::exit(mbss::cli::run(std::env::args_os()));
}
