fn main() {
    std::process::exit(crossbar_rb::cli::run_from(std::env::args_os()));
}
