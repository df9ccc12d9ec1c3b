fn main() {
    let code = match subscan_cli::parse_args(std::env::args_os()) {
        Ok(cfg) => subscan_cli::run(&cfg),
        Err(subscan_cli::CliError::Clap(msg, is_error)) => {
            if is_error {
                eprintln!("{msg}");
                2
            } else {
                println!("{msg}");
                0
            }
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
