fn main() {
    let code = confinium::cli::run(std::env::args_os());
    std::process::exit(code);
}
