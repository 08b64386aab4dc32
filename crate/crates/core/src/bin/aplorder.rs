fn main() {
    std::process::exit(aplorder::cli::run(std::env::args_os()));
}
