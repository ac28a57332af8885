fn main() {
    eprintln!("grakon: command-line interface not wired up yet");
    std::process::exit(2);
}
