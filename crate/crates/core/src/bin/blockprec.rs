fn main() {
    std::process::exit(blockprec::harness::cli_main(std::env::args_os()));
}
