fn main() {
    std::process::exit(structfeat::cli::run(std::env::args_os()));
}
