use std::process::ExitCode;

fn main() -> ExitCode {
    let result = fxpca_cli::from_args(std::env::args_os()).and_then(|cfg| fxpca_cli::run_command(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
