use std::io::Write;

use clap::Parser;
use crashstack::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error for the run itself.
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.run_dir.display());
            for f in &out.files {
                let _ = writeln!(stdout, "  {f}");
            }
        }
        Err(e) => {
            eprintln!("crashstack: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
