fn main() {
    std::process::exit(scopt_cli::run(std::env::args_os()));
}
