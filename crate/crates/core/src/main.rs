fn main() {
    std::process::exit(wvtorus::cli::main_entry());
}
