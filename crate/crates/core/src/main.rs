fn main() {
    std::process::exit(ohwave::cli::dispatch(std::env::args_os()));
}
