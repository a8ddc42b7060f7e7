fn main() {
    std::process::exit(quasidamp::cli::run(std::env::args_os()));
}
