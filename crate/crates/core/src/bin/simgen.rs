fn main() {
    std::process::exit(simgen::pipelines::cli::main_with_args(std::env::args_os()));
}
