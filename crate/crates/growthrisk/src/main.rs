fn main() {
    std::process::exit(growthrisk::run(std::env::args_os()));
}
