fn main() {
    std::process::exit(snn_cli::run(std::env::args_os().collect()));
}
