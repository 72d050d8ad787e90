fn main() {
    std::process::exit(ris_secrecy::harness::cli::main_with_args(std::env::args_os()));
}
