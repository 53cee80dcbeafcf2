//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dag::{analyze, parse_dag, DEFAULT_PROBES};
use crate::engine::{ExperimentConfig, Protocol, Transcript};
use crate::error::{Error, Result};
use crate::numerics::{OpMeter, Scalar};
use crate::verify::{all_pass, ReportRow, Suite};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "opcap", version, about = "Online learning games under per-round operation caps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Play one game described by a JSON experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Where to write the transcript.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a verification sweep and print its table.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inspect an arithmetic circuit file.
    Dag {
        #[command(subcommand)]
        action: DagAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum DagAction {
    /// Certify the dependency bound for every output.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PROBES)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Evaluate on comma-separated rationals, e.g. `1,2/3,-4`.
    Eval {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        inputs: String,
    },
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite '{s}' (expected one of: {})", names.join(", "))
    })
}

/// One summary line per transcript, as written to CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptSummary {
    pub family: String,
    pub learner: String,
    pub adversary: String,
    pub protocol: String,
    pub cap: Option<u64>,
    pub rounds: usize,
    pub mistakes: usize,
    pub max_ops: u64,
    pub total_error: String,
    pub lies: usize,
    pub status: String,
    pub termination: String,
    pub disagreements: Option<usize>,
}

impl From<&Transcript> for TranscriptSummary {
    fn from(t: &Transcript) -> Self {
        let tag = |v: serde_json::Value| match v {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        TranscriptSummary {
            family: t.family.clone(),
            learner: t.learner.clone(),
            adversary: t.adversary.clone(),
            protocol: protocol_label(&t.protocol),
            cap: t.cap,
            rounds: t.rounds.len(),
            mistakes: t.mistakes,
            max_ops: t.max_ops,
            total_error: t.total_error.to_string(),
            lies: t.lies,
            status: status_word(t),
            termination: tag(serde_json::to_value(t.termination).expect("serializable")),
            disagreements: t.certification.as_ref().map(|c| c.disagreements),
        }
    }
}

fn protocol_label(p: &Protocol) -> String {
    match p {
        Protocol::Standard => "standard".into(),
        Protocol::Bandit => "bandit".into(),
        Protocol::AgnosticStrong { eta } => format!("agnostic_strong(eta={eta})"),
        Protocol::AgnosticWeak { eta } => format!("agnostic_weak(eta={eta})"),
        Protocol::DelayedAmbiguous { r } => format!("delayed_ambiguous(r={r})"),
        Protocol::CartBandit { r } => format!("cart_bandit(r={r})"),
    }
}

fn status_word(t: &Transcript) -> String {
    match &t.status {
        crate::engine::Status::Clean => "clean".into(),
        crate::engine::Status::CapExceeded { round } => format!("cap_exceeded@{round}"),
        crate::engine::Status::LearnerError { round, .. } => format!("learner_error@{round}"),
    }
}

/// Serializes rows as CSV with a header, in field order.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Validation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Renders verification rows in the requested format.
pub fn render_rows(rows: &[ReportRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => Ok(serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"),
    }
}

/// Renders a transcript: the full record as JSON, or its summary row as CSV.
pub fn render_transcript(t: &Transcript, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(t.to_json() + "\n"),
        Format::Csv => to_csv(&[TranscriptSummary::from(t)]),
    }
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config { path: path.display().to_string(), msg: e.to_string() })
}

fn write_out(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config { path: path.display().to_string(), msg: e.to_string() })
}

fn parse_inputs(text: &str) -> Result<Vec<Scalar>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| Scalar::parse(s).map_err(|e| Error::Config { path: "inputs".into(), msg: e })).collect()
}

fn run_cmd(config: &PathBuf, out: Option<&PathBuf>, seed: Option<u64>, max_rounds: Option<usize>, format: Format, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = ExperimentConfig::from_json(&read(config)?)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = max_rounds {
        cfg.rounds = r;
    }
    cfg.validate()?;
    let t = cfg.run()?;
    if let Some(path) = out {
        write_out(path, &render_transcript(&t, format)?)?;
    }
    let _ = writeln!(stdout, "mistakes={} max_ops={} status={}", t.mistakes, t.max_ops, status_word(&t));
    Ok(EXIT_PASS)
}

fn verify_cmd(suite: Suite, format: Format, out: Option<&PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let rows = suite.run();
    let text = render_rows(&rows, format)?;
    match out {
        Some(path) => write_out(path, &text)?,
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    for r in rows.iter().filter(|r| !r.verdict) {
        let _ = writeln!(stderr, "FAIL {}: measured={} bound={} {}", r.id, r.measured, r.bound, r.detail);
    }
    let passed = rows.iter().filter(|r| r.verdict).count();
    let _ = writeln!(stderr, "{suite}: {passed}/{} rows pass", rows.len());
    Ok(if all_pass(&rows) { EXIT_PASS } else { EXIT_FAIL })
}

fn dag_cmd(action: &DagAction, stdout: &mut dyn Write) -> Result<i32> {
    match action {
        DagAction::Analyze { file, probes, seed, format } => {
            let dag = parse_dag(&read(file)?)?;
            let reports = analyze(&dag, *probes, *seed)?;
            if *format == Some(Format::Json) {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
            } else {
                for r in &reports {
                    let deps = r.semantic.as_ref().map_or(0, |s| s.len());
                    let _ = writeln!(
                        stdout,
                        "output={} semantic deps={deps}, static binary ops={}, executed ops={}, bound={}, {}",
                        r.output,
                        r.static_binary_ops,
                        r.executed_ops_max.unwrap_or(0),
                        r.bound,
                        if r.pass { "pass" } else { "fail" }
                    );
                }
            }
            Ok(if reports.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
        }
        DagAction::Eval { file, inputs } => {
            let dag = parse_dag(&read(file)?)?;
            let xs = parse_inputs(inputs)?;
            let mut meter = OpMeter::unlimited();
            let values = dag.evaluate(&xs, &mut meter)?;
            let shown: Vec<String> = values.iter().map(Scalar::to_string).collect();
            let _ = writeln!(stdout, "{} ops={}", shown.join(","), meter.used());
            Ok(EXIT_PASS)
        }
    }
}

/// Runs a parsed command, writing results to `stdout` and diagnostics to
/// `stderr`. Returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run { config, out, seed, max_rounds, format } => run_cmd(config, out.as_ref(), *seed, *max_rounds, *format, stdout),
        Command::Verify { suite, format, out } => verify_cmd(*suite, *format, out.as_ref(), stdout, stderr),
        Command::Dag { action } => dag_cmd(action, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Config { .. } | Error::Parse { .. } | Error::Validation(_) | Error::BudgetExceeded { .. } => EXIT_USAGE,
                _ => EXIT_FAIL,
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{e}");
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_PASS
            }
        }
    }
}
