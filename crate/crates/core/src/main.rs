fn main() {
    std::process::exit(transducer::cli::main());
}
