fn main() {
    std::process::exit(foldwave_cli::run(std::env::args_os()));
}
