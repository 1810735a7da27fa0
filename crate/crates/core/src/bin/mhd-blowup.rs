fn main() {
    std::process::exit(mhd_blowup::cli::main_with_args(std::env::args_os()));
}
