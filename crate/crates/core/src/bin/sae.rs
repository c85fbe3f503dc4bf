fn main() {
    std::process::exit(sae_zsl::cli::run(std::env::args_os()));
}
