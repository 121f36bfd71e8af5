fn main() {
    std::process::exit(ising_multispin::cli::main());
}
