fn main() {
    std::process::exit(tpp_core::cli::run_command(std::env::args_os()));
}
