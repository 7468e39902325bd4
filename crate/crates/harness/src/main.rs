fn main() {
    std::process::exit(voqual_harness::cli::main_with(std::env::args_os()));
}
