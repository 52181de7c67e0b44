fn main() {
    rnga::cli::init_logging();
    let code = rnga::cli::run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
