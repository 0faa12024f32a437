fn main() {
    std::process::exit(qnet::cli::cli_main(std::env::args_os()));
}
