use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use smplab_core::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "smplab", version, about = "Experiments on SMP protocols, channel capacity and message compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Capacity of a classical channel with a certified gap.
    Capacity(CapacityArgs),
    /// Substate decomposition of P against Q.
    Substate(SubstateArgs),
    /// One-shot simulation of P from shared samples of Q.
    Simulate(SimulateArgs),
    /// Randomized checks of quantum entropic inequalities.
    Qcheck(QcheckArgs),
    /// Run a protocol once or measure its error.
    #[command(subcommand)]
    Protocol(ProtocolCommand),
    /// Compile a k-fold protocol into a compressed single-instance protocol.
    Compile(CompileArgs),
    /// Brute-force random access code optimum and its certificate.
    Rac(RacArgs),
}

#[derive(Args, Debug, Serialize)]
struct CapacityArgs {
    /// Channel matrix, CSV or JSON (one row per input).
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
}

#[derive(Args, Debug, Serialize)]
struct SubstateArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
    #[arg(long)]
    r: f64,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    q: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Defaults to 4/delta.
    #[arg(long)]
    r: Option<f64>,
    /// Defaults to the next power of two above 8·2^{rk}.
    #[arg(long)]
    max_tries: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Fact {
    Lowinfent,
    Entropytrace,
    Altchar,
    Jointconvexity,
}

#[derive(Args, Debug, Serialize)]
struct QcheckArgs {
    #[arg(long, value_enum)]
    fact: Fact,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Hilbert space dimension (per register for lowinfent).
    #[arg(long, default_value_t = 2)]
    dim: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
enum ProtocolCommand {
    /// Execute the protocol on one input pair.
    Run(RunArgs),
    /// Measure the worst-case error over promised inputs.
    Error(ErrorArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Catalog {
    /// Equality by public-coin fingerprints (needs --t).
    Eq,
    /// Equality by sending both inputs.
    EqFull,
    /// h by SMP with fingerprints (needs --t).
    H,
    /// h by one-way fingerprints (needs --t).
    HOneWay,
    /// f by SMP, heavy side chosen by --heavy.
    F,
    /// f one-way, sender chosen by --sender.
    FOneWay,
    /// s one-way from Alice.
    S,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Side {
    Alice,
    Bob,
}

#[derive(Args, Debug, Serialize)]
struct Selection {
    /// Built-in protocol; use --protocol/--relation for files instead.
    #[arg(long, value_enum, required_unless_present = "protocol", conflicts_with = "protocol")]
    name: Option<Catalog>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    t: Option<u32>,
    #[arg(long, value_enum, default_value_t = Side::Alice)]
    heavy: Side,
    #[arg(long, value_enum, default_value_t = Side::Alice)]
    sender: Side,
    /// For h: restrict to inputs with x_i = y_i.
    #[arg(long)]
    equal_promise: bool,
    /// Protocol specification (JSON).
    #[arg(long, requires = "relation")]
    protocol: Option<PathBuf>,
    /// Relation specification (JSON).
    #[arg(long, requires = "protocol")]
    relation: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    selection: Selection,
    #[arg(long)]
    x: u128,
    #[arg(long)]
    y: u128,
    #[arg(long)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exhaustive,
    Mc,
}

#[derive(Args, Debug, Serialize)]
struct ErrorArgs {
    #[command(flatten)]
    #[serde(flatten)]
    selection: Selection,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Coin samples per input in mc mode.
    #[arg(long)]
    trials: Option<u64>,
    /// Required in mc mode and with --sample-inputs.
    #[arg(long)]
    seed: Option<u64>,
    /// Measure on this many sampled promised inputs instead of all of them.
    #[arg(long)]
    sample_inputs: Option<usize>,
    /// Fail (exit 1) when the measured error exceeds this plus sampling slack.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CompileArgs {
    /// Single-copy protocol specification (JSON).
    #[arg(long)]
    protocol: PathBuf,
    /// Single-copy relation specification (JSON).
    #[arg(long)]
    relation: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    /// Coin samples per input when checking the compiled protocol.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct RacArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
}

/// Envelope shared by every report.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a Command,
    pass: bool,
    result: T,
}

fn exit_status(e: &Error) -> u8 {
    match e {
        Error::Contract(_) => 1,
        Error::Io { .. } => 2,
        Error::Parse(_) | Error::InvalidDistribution(_) | Error::SizeMismatch(..) => 3,
        Error::NonConvergence { .. } => 5,
        _ => 4,
    }
}

fn emit(cli: &Cli, pass: bool, result: serde_json::Value) -> Result<(), Error> {
    let report = Report {
        tool: "smplab",
        version: env!("CARGO_PKG_VERSION"),
        config: &cli.command,
        pass,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = commands::dispatch(&cli.command).and_then(|(pass, result)| {
        emit(&cli, pass, result)?;
        Ok(pass)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("smplab: contract failed (see report)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("smplab: error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}
