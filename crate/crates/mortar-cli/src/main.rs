fn main() {
    std::process::exit(mortar_cli::run(std::env::args_os()));
}
