fn main() {
    std::process::exit(levyheat::cli::run_from_args());
}
