fn main() {
    std::process::exit(graphdiff_cli::cli_main(std::env::args_os()));
}
