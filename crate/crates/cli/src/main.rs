use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zfx_cli::config::{Command, Format, RunArgs, RunConfig};
use zfx_cli::sweep::{sweep, sweep_csv, SweepSpec};
use zfx_cli::{render, run, RunError};

#[derive(Parser)]
#[command(name = "zfx", version, about = "Exhaustive verification of extractors for zero-fixing sources")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tree projection composed with a bit-fixing extractor.
    VerifyStepup(RunArgs),
    /// Shift-graph projection composed with a searched symbol extractor.
    VerifyShift(RunArgs),
    /// Seeded search for a symbol-fixing extractor table.
    SearchF2(RunArgs),
    /// Build the shift-graph coloring tower and count monochromatic edges.
    ColorShift(RunArgs),
    /// Surjectivity of the 3-coloring disperser on restricted sets.
    DisperserCheck(RunArgs),
    /// Greedy homogenization and the color ceiling.
    UpperBound(RunArgs),
    /// Sanity checks of the distribution arithmetic.
    ProbcoreSelftest(RunArgs),
    /// Run another subcommand over a grid of parameter values.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    template: Command,
    /// `name=lo..hi` or `name=a,b,c`; repeat to form a grid.
    #[arg(long = "vary")]
    vary: Vec<String>,
    #[command(flatten)]
    args: RunArgs,
}

fn emit(text: &str, out: Option<&String>) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| RunError::Io(format!("{path}: {e}"))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| RunError::Io(e.to_string())),
    }
}

fn main_inner(cli: Cli) -> Result<i32, RunError> {
    let (command, args) = match cli.cmd {
        Cmd::VerifyStepup(a) => (Command::VerifyStepup, a),
        Cmd::VerifyShift(a) => (Command::VerifyShift, a),
        Cmd::SearchF2(a) => (Command::SearchF2, a),
        Cmd::ColorShift(a) => (Command::ColorShift, a),
        Cmd::DisperserCheck(a) => (Command::DisperserCheck, a),
        Cmd::UpperBound(a) => (Command::UpperBound, a),
        Cmd::ProbcoreSelftest(a) => (Command::ProbcoreSelftest, a),
        Cmd::Sweep(s) => {
            let vary = s.vary.iter().map(|v| v.parse()).collect::<Result<Vec<SweepSpec>, _>>()?;
            let report = sweep(s.template, &s.args, &vary)?;
            let text = match s.args.format {
                Format::Json => zfx_cli::report::to_json(&report),
                Format::Csv => sweep_csv(&report),
            };
            emit(&text, s.args.out.as_ref())?;
            return Ok(0);
        }
    };
    let out = args.out.clone();
    let report = run(&RunConfig { command, args })?;
    emit(&render(&report), out.as_ref())?;
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("zfx: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
