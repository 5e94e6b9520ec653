fn main() {
    std::process::exit(depfsl::cli::run(std::env::args_os()));
}
