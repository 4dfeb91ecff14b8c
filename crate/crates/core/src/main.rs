fn main() {
    std::process::exit(ma_eigen::cli::run_from(std::env::args_os()));
}
