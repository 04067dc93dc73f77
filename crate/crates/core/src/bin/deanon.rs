fn main() {
    std::process::exit(deanon::cli::main());
}
