fn main() {
    std::process::exit(coverage_impact::cli::run(std::env::args_os()));
}
