mod commands;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{sha256_hex, to_json, write_atomic, Artifacts, RunManifest};
use salem_core::kaufman_engine::schedule::{Caps, Mode};
use salem_core::SalemError;

#[derive(Parser, Debug)]
#[command(name = "salem", version, about = "Workbench for effective Salem set constructions")]
struct Cli {
    /// certified runs the proven constants; demo relaxes C for desk-scale runs
    #[arg(long, value_enum, default_value_t = ModeArg::Demo, global = true)]
    mode: ModeArg,
    /// JSON file with resource caps (missing fields keep their defaults)
    #[arg(long, global = true)]
    caps: Option<PathBuf>,
    /// Output file; a `<out>.manifest.json` is written next to it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized generators
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Demo mode only: the constant C used in place of the certified one
    #[arg(long, global = true)]
    relaxed_c: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Certified,
    Demo,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a finite level of one of the constructions
    Construct(ConstructArgs),
    /// Re-check a bound and report pass/fail
    Verify(VerifyArgs),
    /// Diagnostic dimension fits
    Estimate(EstimateArgs),
    /// Digit codec for dimension values
    Codec(CodecArgs),
    /// Decide whether Hausdorff balls cover K([0,1])
    CoverCheck(CoverArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
enum ConstructKind {
    SLevel,
    TLevel,
    G,
    F,
    BigF,
    H,
    Cantor,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: ConstructKind,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 0)]
    k: u64,
    #[arg(long)]
    q: Option<String>,
    /// Bits x(1), x(2), … as a 0/1 string
    #[arg(long, default_value = "")]
    x: String,
    /// Lower-real prefix as comma-separated rationals
    #[arg(long)]
    p: Option<String>,
    #[arg(long, default_value_t = 0)]
    n_max: u64,
    #[arg(long, default_value_t = 0)]
    m_max: u64,
    /// Bit matrix rows separated by ';', e.g. 0101;0011
    #[arg(long)]
    matrix: Option<String>,
    /// g only: write the aggregated stage trace instead of the level
    #[arg(long)]
    trace: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
enum Suite {
    Window,
    Decay,
    EffectiveG,
    CoverSum,
    TreeCode,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long = "M")]
    m: Option<u64>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long = "N", default_value_t = 1)]
    n: usize,
    #[arg(long)]
    band: Option<usize>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    m0: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long, default_value = "")]
    x: String,
    #[arg(long)]
    k: Option<u64>,
    /// Number of earlier stages folded into ψ (0 is the delta table)
    #[arg(long, default_value_t = 0)]
    psi_k: u64,
    #[arg(long, default_value_t = 6)]
    depth: u32,
    /// Schedule, trace or tree-code JSON to check instead of a generated one
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EstimateKind {
    Box,
    Fourier,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(value_enum)]
    kind: EstimateKind,
    /// Levels JSON (list of {"j", "level"}) or coefficient table JSON
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use Cantor levels 1..=this, each at its matching dyadic scale
    #[arg(long)]
    cantor: Option<u32>,
    /// Use [0,1] at scales 1..=this
    #[arg(long)]
    full: Option<u32>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, default_value_t = 512)]
    band: usize,
    #[arg(long, default_value_t = 2)]
    band_lo: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CodecOp {
    Encode,
    Decode,
}

#[derive(Args, Debug)]
struct CodecArgs {
    #[arg(value_enum)]
    op: CodecOp,
    #[arg(long)]
    bits: Option<String>,
    #[arg(long)]
    value: Option<String>,
    #[arg(long, default_value_t = 1)]
    d: u64,
    /// Number of bits to decode; the shortest exact decoding by default
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug)]
struct CoverArgs {
    /// JSON list of balls {"center": [...], "radius": "p/q"}
    balls: PathBuf,
}

/// A run's outcome: exit code and, for failures, a message for stderr.
pub struct Outcome {
    pub code: u8,
    pub message: Option<String>,
}

pub fn error_code(e: &SalemError) -> u8 {
    match e {
        SalemError::Invalid(_) | SalemError::Parse(_) => 2,
        SalemError::Infeasible(_) => 3,
        SalemError::NonCodeword(_) => 1,
    }
}

fn load_caps(path: &Option<PathBuf>, inputs: &mut BTreeMap<String, String>) -> Result<Caps, SalemError> {
    let Some(p) = path else { return Ok(Caps::default()) };
    let bytes = std::fs::read(p).map_err(|e| SalemError::invalid(format!("reading {}: {e}", p.display())))?;
    inputs.insert(p.display().to_string(), sha256_hex(&bytes));
    serde_json::from_slice(&bytes).map_err(|e| SalemError::Parse(format!("caps: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut inputs = BTreeMap::new();
    let mut art = Artifacts::default();
    let caps = load_caps(&cli.caps, &mut inputs);
    let (outcome, mode) = match caps {
        Err(e) => (Outcome { code: error_code(&e), message: Some(e.to_string()) }, Mode::demo(None, Caps::default())),
        Ok(caps) => {
            let relaxed = match cli.relaxed_c.as_deref().map(salem_core::rat::parse_q).transpose() {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let mode = match cli.mode {
                ModeArg::Certified => Mode::certified(caps),
                ModeArg::Demo => Mode::demo(relaxed, caps),
            };
            let outcome = commands::run(&cli, &mode, &mut inputs, &mut art);
            (outcome, mode)
        }
    };
    if let Some(msg) = &outcome.message {
        eprintln!("{msg}");
    }
    use std::io::Write;
    std::io::stdout().write_all(&art.stdout).ok();
    let mut outputs = BTreeMap::new();
    for (path, bytes) in &art.files {
        if let Err(e) = write_atomic(path, bytes) {
            eprintln!("writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
        outputs.insert(path.display().to_string(), sha256_hex(bytes));
    }
    if let Some(out) = &cli.out {
        let manifest = RunManifest {
            command: commands::command_name(&cli.command),
            parameters: commands::parameters(&cli),
            mode: mode.kind,
            caps: mode.caps.clone(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: start.elapsed().as_millis(),
            exit_code: outcome.code as i32,
            input_digests: inputs,
            output_digests: outputs,
        };
        if let Err(e) = write_atomic(&output::sidecar(out, ".manifest.json"), &to_json(&manifest)) {
            eprintln!("writing manifest: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(outcome.code)
}
