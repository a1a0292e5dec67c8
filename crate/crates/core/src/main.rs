use std::process::ExitCode;

fn main() -> ExitCode {
    let invocation = match scvamp::cli::parse_cli(std::env::args_os()) {
        Ok(inv) => inv,
        Err(e) => e.exit(),
    };
    match scvamp::cli::execute(&invocation) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
