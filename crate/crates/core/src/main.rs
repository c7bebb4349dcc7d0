use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hillspec::job::{self, Command, Format, JobError, EXIT_INPUT};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "hillspec",
    version,
    about = "Spectral computations for D^{2m} + V with periodic distributional potentials"
)]
struct Cli {
    /// spectrum | decompose | converge | numrange | formbound | sector | regularity | potinfo
    command: String,
    /// Job config, or a report emitted by an earlier run.
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<i32, JobError> {
    let input = |message: String| JobError {
        code: EXIT_INPUT,
        message,
    };
    let command = Command::parse(&cli.command).ok_or_else(|| input(format!("unknown command {:?}", cli.command)))?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| input(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = job::validate(&text)?;
    if cfg.command != command {
        return Err(input(format!(
            "config is a {} job but the command line asks for {}",
            cfg.command.as_str(),
            command.as_str()
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(format) = cli.format {
        cfg.format = match format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    let report = job::run(&cfg)?;
    let rendered = report.render();
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, rendered).map_err(|e| input(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{rendered}"),
    }
    eprintln!("{}: {:?}", command.as_str(), report.status);
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("hillspec {}: {e}", cli.command);
            ExitCode::from(e.code as u8)
        }
    }
}
