fn main() {
    std::process::exit(medgraph::cli::cli_main(std::env::args_os()));
}
