fn main() {
    std::process::exit(feedctx::cli::run(std::env::args_os()));
}
