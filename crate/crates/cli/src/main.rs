fn main() {
    std::process::exit(saacm_cli::parse_and_dispatch(std::env::args_os()));
}
