fn main() {
    std::process::exit(mazur_cli::run(std::env::args_os()));
}
