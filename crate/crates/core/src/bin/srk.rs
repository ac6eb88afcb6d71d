fn main() {
    std::process::exit(srk_core::cli::main());
}
