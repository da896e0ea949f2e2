fn main() {
    std::process::exit(recurlab_cli::run(std::env::args_os()));
}
