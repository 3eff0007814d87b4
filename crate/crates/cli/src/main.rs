fn main() {
    std::process::exit(tml::run(std::env::args_os()));
}
