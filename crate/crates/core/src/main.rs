fn main() {
    std::process::exit(fubini_crit::cli::run(std::env::args_os()));
}
