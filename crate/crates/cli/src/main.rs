fn main() {
    std::process::exit(paamp_cli::run(std::env::args_os()));
}
