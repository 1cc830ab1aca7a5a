fn main() {
    std::process::exit(tacservo_cli::run(std::env::args_os()));
}
