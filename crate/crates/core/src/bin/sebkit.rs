fn main() {
    std::process::exit(sebkit::cli::main());
}
