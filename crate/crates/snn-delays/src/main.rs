fn main() {
    std::process::exit(snn_delays::cli::run());
}
