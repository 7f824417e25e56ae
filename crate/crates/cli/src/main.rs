fn main() {
    std::process::exit(tbvp_cli::run(std::env::args_os()));
}
