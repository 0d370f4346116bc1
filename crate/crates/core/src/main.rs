fn main() {
    std::process::exit(impulse_denoise::cli::main());
}
