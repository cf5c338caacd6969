fn main() {
    std::process::exit(semisup_robust::cli::cli_main(std::env::args_os()));
}
