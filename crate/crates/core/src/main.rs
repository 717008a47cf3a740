use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plurigap::experiment::{
    self, parse_report, render, to_json, verify_report, Command, Format, Pair, RunConfig, SMode, EXIT_CHECK_FAILED,
    EXIT_OK, EXIT_USAGE,
};

/// Bounds for the three-pole Green and Lempert functions of the bidisk and
/// the ball.
#[derive(Debug, Parser)]
#[command(name = "plurigap", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Build the Neil disk and check pole passages and containment.
    NeilVerify(RunArgs),
    /// Neil upper bound and single-pole lower oracle.
    GreenBound(RunArgs),
    /// Multistart search for the Lempert function.
    LempertSearch(RunArgs),
    /// Evaluate the inequality chain on a candidate and on samples below the threshold.
    ChainCheck(RunArgs),
    /// Full gap experiment: both bidisk bounds, the search, the chain and the ball transfer.
    Gap(RunArgs),
    /// Transfer the bounds to the ball and compare them.
    BallTransfer(RunArgs),
    /// Re-check every witness in a report file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON or TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Values of |z2| as `a,b,c` or `log10:start:stop:count`.
    #[arg(long, value_name = "SPEC")]
    sweep: Option<String>,
    /// First coordinate as `re,im`.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    z1: Option<String>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    z2: Option<String>,
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// Fixed `s`; without it `s = epsilon`.
    #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    n_starts: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Use the single pole at the origin.
    #[arg(long)]
    single_pole: bool,
    /// Exit with status 1 unless the gap is strict.
    #[arg(long)]
    expect_strict: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Report written by another subcommand.
    report: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn parse_pair(flag: &str, v: &str) -> Result<Pair, String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("--{flag}: '{v}' is not RE,IM"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("--{flag}: '{v}' is not RE,IM")),
    }
}

fn resolve(a: &RunArgs) -> Result<RunConfig, (i32, String)> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p).map_err(|e| (EXIT_USAGE, e.to_string()))?,
        None => RunConfig::default(),
    };
    let usage = |m: String| (EXIT_USAGE, m);
    if let Some(v) = &a.z1 {
        cfg.z[0] = parse_pair("z1", v).map_err(usage)?;
    }
    if let Some(v) = &a.z2 {
        cfg.z[1] = parse_pair("z2", v).map_err(usage)?;
    }
    if let Some(v) = &a.epsilon {
        cfg.epsilon = parse_pair("epsilon", v).map_err(usage)?;
    }
    if let Some(v) = &a.s {
        cfg.s = parse_pair("s", v).map_err(usage)?;
        cfg.s_mode = SMode::Fixed;
    }
    if let Some(v) = a.delta {
        cfg.delta = v;
    }
    if let Some(v) = a.eta {
        cfg.eta = v;
    }
    if let Some(v) = a.n_starts {
        cfg.n_starts = v;
    }
    if let Some(v) = a.samples {
        cfg.samples = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.sweep {
        cfg.sweep = Some(v.clone());
    }
    if let Some(f) = a.format {
        cfg.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    if let Some(p) = &a.out {
        cfg.output_path = Some(p.display().to_string());
    }
    cfg.single_pole |= a.single_pole;
    cfg.expect_strict |= a.expect_strict;
    Ok(cfg)
}

fn emit(text: &str, out: Option<&str>) -> Result<(), (i32, String)> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| (EXIT_USAGE, format!("cannot write {p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_command(command: Command, a: &RunArgs) -> Result<i32, (i32, String)> {
    let cfg = resolve(a)?;
    let report = experiment::run(command, &cfg).map_err(|e| (EXIT_USAGE, e.to_string()))?;
    let text = render(&report, cfg.format).map_err(|e| (EXIT_CHECK_FAILED, e.to_string()))?;
    emit(&text, cfg.output_path.as_deref())?;
    for p in &report.points {
        for m in &p.messages {
            eprintln!("{m}");
        }
    }
    Ok(report.exit_code)
}

fn run_verify(a: &VerifyArgs) -> Result<i32, (i32, String)> {
    let text = std::fs::read_to_string(&a.report)
        .map_err(|e| (EXIT_USAGE, format!("cannot read {}: {e}", a.report.display())))?;
    let report = parse_report(&text).map_err(|e| (EXIT_USAGE, e.to_string()))?;
    let v = verify_report(&report);
    let out = to_json(&v).map_err(|e| (EXIT_CHECK_FAILED, e.to_string()))?;
    emit(&out, a.out.as_ref().map(|p| p.display().to_string()).as_deref())?;
    for c in v.checks.iter().filter(|c| !c.pass) {
        eprintln!("point {}: {} failed ({})", c.point, c.name, c.value);
    }
    Ok(if v.all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(e) = experiment::init_thread_pool() {
        eprintln!("{e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let result = match &cli.command {
        Cmd::NeilVerify(a) => run_command(Command::NeilVerify, a),
        Cmd::GreenBound(a) => run_command(Command::GreenBound, a),
        Cmd::LempertSearch(a) => run_command(Command::LempertSearch, a),
        Cmd::ChainCheck(a) => run_command(Command::ChainCheck, a),
        Cmd::Gap(a) => run_command(Command::Gap, a),
        Cmd::BallTransfer(a) => run_command(Command::BallTransfer, a),
        Cmd::Verify(a) => run_verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code as u8)
        }
    }
}
