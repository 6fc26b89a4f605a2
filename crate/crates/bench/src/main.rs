fn main() {
    std::process::exit(mmrec_bench::cli::run(std::env::args_os()));
}
