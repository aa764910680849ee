fn main() {
    std::process::exit(latsym_cli::dispatch(std::env::args_os()));
}
