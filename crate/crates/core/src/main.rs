fn main() {
    let code = neurognn::cli::main(std::env::args_os());
    std::process::exit(code);
}
