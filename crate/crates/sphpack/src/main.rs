fn main() {
    std::process::exit(sphpack::cli::cli_main(std::env::args()));
}
