fn main() {
    std::process::exit(mems_lab::cli::run(std::env::args_os()));
}
