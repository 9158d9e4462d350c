use std::process::ExitCode;

fn main() -> ExitCode {
    match symfrog_cli::parse_args(std::env::args_os()) {
        Ok(inv) => ExitCode::from(symfrog_cli::run(inv)),
        Err(e) => {
            let _ = e.print();
            ExitCode::from(if e.exit_code() == 0 {
                symfrog_cli::EXIT_OK
            } else {
                symfrog_cli::EXIT_USAGE
            })
        }
    }
}
