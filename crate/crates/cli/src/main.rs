fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(xcavity_cli::run(&argv));
}
