fn main() {
    std::process::exit(inertia::cli::run_from_args(std::env::args_os()));
}
