use std::process::ExitCode;

use clap::Parser;
use interplay_cli::commands::error_record;
use interplay_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", serde_json::json!({"error": "ChecksFailed", "message": "one or more checks failed"}));
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("{}", error_record(&err));
            ExitCode::from(2)
        }
    }
}
