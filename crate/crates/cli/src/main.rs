fn main() {
    std::process::exit(fdcalc_cli::run(std::env::args_os()));
}
