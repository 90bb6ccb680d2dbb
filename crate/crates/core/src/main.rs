fn main() {
    std::process::exit(partdiv::cli::main_entry());
}
