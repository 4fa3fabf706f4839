fn main() {
    std::process::exit(lzms::cli::run(std::env::args_os()));
}
