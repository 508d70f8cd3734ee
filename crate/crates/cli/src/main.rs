fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(pam_cli::run(args));
}
