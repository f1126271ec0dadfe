fn main() {
    std::process::exit(kshopf::cli::main_from(std::env::args_os()));
}
