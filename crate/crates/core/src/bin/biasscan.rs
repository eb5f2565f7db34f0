fn main() {
    std::process::exit(biasscan::cli::run(std::env::args_os()));
}
