fn main() {
    std::process::exit(axiscope::cli::run(std::env::args_os()));
}
