fn main() {
    std::process::exit(mwc_lint::execute(std::env::args_os()));
}
