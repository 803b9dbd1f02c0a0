fn main() {
    std::process::exit(pwgd::cli::run(std::env::args_os()));
}
