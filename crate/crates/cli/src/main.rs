fn main() {
    std::process::exit(narrowcap_cli::run(std::env::args_os()));
}
