fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(hexcircles::cli::cli_main(&args));
}
