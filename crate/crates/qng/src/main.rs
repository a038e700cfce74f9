use std::fs;
use std::io::Write;
use std::process;

use clap::Parser;
use qng::cli::{to_config, Cli};
use qng::run::execute;
use qng::{CliError, ExitCode};

fn run() -> Result<ExitCode, CliError> {
    let (cfg, save) = to_config(Cli::parse())?;
    if let Some(path) = save {
        let text = serde_json::to_string_pretty(&cfg)? + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    let outcome = execute(&cfg)?;
    eprint!("{}", outcome.summary);
    if let Some(text) = outcome.emit(&cfg)? {
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(outcome.exit)
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qng: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}
