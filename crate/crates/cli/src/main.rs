use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use soliton_cli::{emit, run, CheckName, CliError, CurveConfig, Format, RunConfig, EXIT_CONFIG, PRECISION_ENV};

/// Certify that p-power torsion points of explicit Jacobians avoid the theta divisor.
#[derive(Parser, Debug)]
#[command(name = "soliton", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the checks named in a JSON config (or on the command line).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the config's check list; repeatable.
        #[arg(long = "check", value_parser = parse_check)]
        checks: Vec<CheckName>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Gap sequence, Maya diagram and integrality of the coordinate ring.
    Gaps(Shortcut),
    /// Hasse–Witt matrix, ordinarity and the product rule.
    HasseWitt(Shortcut),
    /// Frobenius decomposition coefficients of the formal logarithm.
    FormalLog(Shortcut),
    /// Torsion solutions of the formal logarithm.
    Torsion(Shortcut),
    /// Theta-divisor certificates for the torsion points.
    Theta(Shortcut),
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings (the report is then no longer reproducible byte for byte).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    FermatQuotient,
    HyperellipticX5x,
}

#[derive(Args, Debug)]
struct Shortcut {
    #[arg(long, value_enum, default_value = "fermat-quotient")]
    family: Family,
    #[arg(long, default_value_t = 5)]
    d: u32,
    #[arg(long, default_value_t = 2)]
    a: u32,
    #[arg(long, default_value_t = 2)]
    g: u32,
    #[arg(long, default_value_t = 11)]
    p: u64,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long, default_value_t = 1)]
    level: u32,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_check(s: &str) -> Result<CheckName, String> {
    CheckName::parse(s).ok_or_else(|| format!("unknown check {s:?}"))
}

fn shortcut_config(s: &Shortcut, check: CheckName) -> RunConfig {
    let curve = match s.family {
        Family::FermatQuotient => CurveConfig::FermatQuotient { d: s.d, a: s.a },
        Family::HyperellipticX5x => CurveConfig::HyperellipticX5x { g: s.g },
    };
    let mut c = RunConfig::new(s.p, curve);
    c.precision = s.precision;
    c.level = s.level;
    c.checks = vec![check];
    c
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (mut config, output) = match cli.command {
        Command::Run { config, checks, output } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Io { path: config.display().to_string(), message: e.to_string() })?;
            let mut c = RunConfig::from_json(&text)?;
            if !checks.is_empty() {
                c.checks = checks;
            }
            (c, output)
        }
        Command::Gaps(s) => (shortcut_config(&s, CheckName::Gaps), s.output),
        Command::HasseWitt(s) => (shortcut_config(&s, CheckName::HasseWitt), s.output),
        Command::FormalLog(s) => (shortcut_config(&s, CheckName::FormalLog), s.output),
        Command::Torsion(s) => (shortcut_config(&s, CheckName::Torsion), s.output),
        Command::Theta(s) => (shortcut_config(&s, CheckName::Theta), s.output),
    };
    config.resolve_precision(std::env::var(PRECISION_ENV).ok().as_deref())?;
    let report = run(&config, output.timings)?;
    let text = emit(&report, output.format);
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?,
        None => print!("{text}"),
    }
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; help and version requests succeed.
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("soliton: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
