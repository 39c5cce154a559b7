fn main() {
    std::process::exit(symcheck::cli_main());
}
