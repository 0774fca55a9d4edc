fn main() {
    std::process::exit(local_predictor::cli::main_with_args(std::env::args_os()));
}
