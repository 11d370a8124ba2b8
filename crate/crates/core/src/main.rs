fn main() {
    std::process::exit(wldos::cli::run(std::env::args_os()));
}
