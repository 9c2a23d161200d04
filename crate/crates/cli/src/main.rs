fn main() {
    std::process::exit(topiceval_cli::run(std::env::args_os()));
}
