fn main() {
    std::process::exit(growthbif::cli::run(std::env::args_os()));
}
