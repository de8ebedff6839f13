fn main() {
    std::process::exit(opnorm_cli::run(std::env::args_os()));
}
