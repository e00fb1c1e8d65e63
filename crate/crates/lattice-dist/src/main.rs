fn main() {
    std::process::exit(lattice_dist::cli::main_with_args(std::env::args_os()));
}
