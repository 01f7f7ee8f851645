use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ucgs_bench::certify::certify;
use ucgs_bench::compare::compare;
use ucgs_bench::run::execute;
use ucgs_bench::{BenchError, RunConfig, EXIT_CERTIFY};

#[derive(Parser)]
#[command(name = "ucgs-bench", version, about = "Run, compare and certify projection-free solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method and write its per-iteration trace as CSV.
    Run(Common),
    /// LMO calls needed per accuracy level, with fitted slopes.
    Compare(Common),
    /// Run one method and check its guarantees.
    Certify(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (CSV for run, report text otherwise); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for compare.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn load(&self) -> Result<RunConfig, BenchError> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)?,
            None => String::new(),
        };
        let mut cfg = RunConfig::parse(&text, &self.set)?;
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), BenchError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, BenchError> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.load()?;
            let problem = cfg.instance.build()?;
            let outcome = execute(&cfg, &problem, false)?;
            emit(&cfg, &outcome.trace().to_csv())?;
            eprintln!("{}", outcome.summary());
            Ok(0)
        }
        Command::Compare(c) => {
            let cfg = c.load()?;
            let report = compare(&cfg, c.jobs)?;
            emit(&cfg, &report.render())?;
            Ok(0)
        }
        Command::Certify(c) => {
            let cfg = c.load()?;
            let report = certify(&cfg)?;
            emit(&cfg, &report.render())?;
            Ok(if report.passed() { 0 } else { EXIT_CERTIFY })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
