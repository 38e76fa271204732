fn main() {
    std::process::exit(pareto_bandit::cli::main_with_args(std::env::args_os()));
}
