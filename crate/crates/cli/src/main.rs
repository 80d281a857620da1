use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use eqthink_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    let text = out.render(cli.json);
    if out.exit_code() == 2 && !cli.json {
        eprint!("{text}");
    } else {
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
    ExitCode::from(out.exit_code() as u8)
}
