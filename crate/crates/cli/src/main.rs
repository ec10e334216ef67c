mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command, Format};
use error::CliResult;

fn run(cli: Cli) -> CliResult<()> {
    let shared = config::resolve(&cli.shared)?;
    let out = shared.output.as_deref();
    let text = match &cli.command {
        Command::Qfi(a) => commands::qfi(&shared, a)?.render(shared.format.unwrap_or(Format::Csv)),
        Command::Figure(a) => commands::figure(&shared, a)?.render(shared.format.unwrap_or(Format::Csv)),
        Command::Check(a) => {
            commands::render_record("check", &commands::check(a)?, shared.format.unwrap_or(Format::Json))
        }
        Command::Montecarlo(a) => commands::render_record(
            "montecarlo",
            &commands::montecarlo(&shared, a)?,
            shared.format.unwrap_or(Format::Json),
        ),
        Command::ImmuneSet(a) => {
            let set = commands::immune_set(a)?;
            match shared.format {
                None => set.iter().map(|s| format!("{s}\n")).collect(),
                Some(Format::Json) => format!("{}\n", serde_json::to_string_pretty(&set).expect("strings serialize")),
                Some(Format::Csv) => {
                    let mut doc = output::Document::new("immune-set");
                    doc.meta("qubits", a.qubits);
                    doc.columns = vec!["pauli".into()];
                    doc.rows = set.into_iter().map(|s| vec![output::Cell::Text(s)]).collect();
                    doc.render(Format::Csv)
                }
            }
        }
    };
    output::emit(&text, out)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
