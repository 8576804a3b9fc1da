use std::io::Write;

use clap::Parser;

use reductive_shell::cli::{run, Cli};

fn main() {
    match run(Cli::parse()) {
        Ok(out) => {
            if !out.text.is_empty() {
                // A closed pipe downstream is not an error worth reporting.
                let _ = writeln!(std::io::stdout().lock(), "{}", out.text.trim_end());
            }
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
