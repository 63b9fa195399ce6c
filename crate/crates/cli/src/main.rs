mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dynmcx::blocks::{correction_contract, derive_correction, library, verify_spec};
use dynmcx::resources::{analyze_result, generate_table, DepthMode, OutcomeAssumption};
use dynmcx::sim::{check_cnx_equivalence, InputSet, MAX_EXHAUSTIVE_CONTROLS};
use dynmcx::synth::{synthesize, Strategy, SynthesisResult};
use dynmcx::{qasm, BlockKind};

use render::{BlockCheck, CorrectionCheck, SynthMetadata};

const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_RANDOM_INPUTS: usize = 32;
const WORKERS_ENV: &str = "DYNMCX_WORKERS";

#[derive(Parser)]
#[command(name = "dynmcx", version, about = "Multi-controlled Toffoli synthesis with mid-circuit measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a C^nX circuit and write QASM plus JSON metadata.
    Synth(CircuitArgs),
    /// Print the CX count, T-count and T-depth of a synthesized circuit.
    Analyze(AnalyzeArgs),
    /// Simulate every measurement branch and compare against the ideal gate.
    Verify(VerifyArgs),
    /// Print the static versus dynamic resource table.
    Table(TableArgs),
    /// Write the QASM of a synthesized circuit.
    ExportQasm(CircuitArgs),
    /// Check every library block against its definition and certificate.
    VerifyBlocks(BlocksArgs),
}

#[derive(Args)]
struct Target {
    /// Number of controls.
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here (atomically) instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CircuitArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    target: Target,
    /// Measurement outcomes to cost: worst = all ones, best = all zeros.
    #[arg(long, value_enum)]
    assumption: Option<Assumption>,
    #[arg(long, value_enum, default_value = "block")]
    tdepth_mode: TDepthMode,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    target: Target,
    /// Defaults to exhaustive for n <= 8 and random above.
    #[arg(long, value_enum)]
    inputs: Option<Inputs>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of random inputs.
    #[arg(long, default_value_t = DEFAULT_RANDOM_INPUTS)]
    count: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 16)]
    n_max: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct BlocksArgs {
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
    Qasm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Assumption {
    Worst,
    Best,
}

#[derive(Clone, Copy, ValueEnum)]
enum TDepthMode {
    Block,
    Gate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inputs {
    Exhaustive,
    Random,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Failure classes mapped to process exit codes.
enum Failure {
    Usage(String),
    Check(String),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `dynmcx help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .context("configuring the worker pool")
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Synth(args) => synth(args),
        Command::Analyze(args) => analyze(args),
        Command::Verify(args) => verify(args),
        Command::Table(args) => table(args),
        Command::ExportQasm(args) => export_qasm(args),
        Command::VerifyBlocks(args) => verify_blocks(args),
    }
}

fn choose_format(out: &Output, allowed: &[Format], default: Format, command: &str) -> std::result::Result<Format, Failure> {
    let f = out.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let name = f.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        Err(Failure::Usage(format!("`{command}` does not support --format {name}")))
    }
}

fn build(target: &Target) -> std::result::Result<SynthesisResult, Failure> {
    if !target.strategy.supports(target.n) {
        return Err(Failure::Usage(format!(
            "strategy {} does not support n = {}",
            target.strategy, target.n
        )));
    }
    synthesize(target.n, target.strategy)
        .with_context(|| format!("synthesizing n = {} with {}", target.n, target.strategy))
        .map_err(Failure::Internal)
}

fn emit(out: &Output, text: &str) -> Outcome {
    match &out.output {
        Some(path) => write_atomic(path, text).map_err(Failure::Internal),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn synth(args: CircuitArgs) -> Outcome {
    choose_format(&args.out, &[Format::Qasm], Format::Qasm, "synth")?;
    let result = build(&args.target)?;
    let text = qasm::emit_result(&result);
    let meta = SynthMetadata::new(&result).map_err(Failure::Internal)?;
    let json = render::json(&meta);
    match &args.out.output {
        Some(path) => {
            write_atomic(path, &text)?;
            write_atomic(&path.with_extension("json"), &json)?;
        }
        None => {
            print!("{text}");
            eprint!("{json}");
        }
    }
    Ok(())
}

fn export_qasm(args: CircuitArgs) -> Outcome {
    choose_format(&args.out, &[Format::Qasm], Format::Qasm, "export-qasm")?;
    let result = build(&args.target)?;
    emit(&args.out, &qasm::emit_result(&result))
}

fn analyze(args: AnalyzeArgs) -> Outcome {
    let format = choose_format(&args.out, &[Format::Json, Format::Csv, Format::Markdown], Format::Markdown, "analyze")?;
    let result = build(&args.target)?;
    let assumption = match (result.circuit.has_measurements(), args.assumption) {
        (true, a) => Some(a.unwrap_or(Assumption::Worst)),
        (false, a) => a,
    }
    .map(|a| match a {
        Assumption::Worst => OutcomeAssumption::AllOnes,
        Assumption::Best => OutcomeAssumption::AllZeros,
    });
    let mode = match args.tdepth_mode {
        TDepthMode::Block => DepthMode::Block,
        TDepthMode::Gate => DepthMode::Gate,
    };
    let report = analyze_result(&result, assumption, mode).context("analyzing")?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let text = match format {
        Format::Json => render::json(&report),
        Format::Csv => render::report_csv(&result, &report),
        _ => render::report_markdown(&result, &report, mode),
    };
    emit(&args.out, &text)
}

fn verify(args: VerifyArgs) -> Outcome {
    let format = choose_format(&args.out, &[Format::Json, Format::Markdown], Format::Markdown, "verify")?;
    let n = args.target.n;
    let inputs = match args.inputs {
        Some(Inputs::Exhaustive) if n > MAX_EXHAUSTIVE_CONTROLS => {
            return Err(Failure::Usage(format!(
                "exhaustive inputs are limited to n <= {MAX_EXHAUSTIVE_CONTROLS}; use --inputs random"
            )))
        }
        Some(Inputs::Exhaustive) => InputSet::ExhaustiveBasis,
        Some(Inputs::Random) => InputSet::Random { count: args.count, seed: args.seed },
        None if n <= MAX_EXHAUSTIVE_CONTROLS => InputSet::ExhaustiveBasis,
        None => InputSet::Random { count: args.count, seed: args.seed },
    };
    let result = build(&args.target)?;
    let report = check_cnx_equivalence(&result, inputs)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let text = match format {
        Format::Json => render::json(&report),
        _ => render::equivalence_markdown(&result, &report),
    };
    emit(&args.out, &text)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check(render::equivalence_diff(&report)))
    }
}

fn table(args: TableArgs) -> Outcome {
    let format = choose_format(&args.out, &[Format::Json, Format::Csv, Format::Markdown], Format::Markdown, "table")?;
    let table = generate_table(args.n_max).map_err(|e| Failure::Usage(e.to_string()))?;
    let text = match format {
        Format::Json => table.to_json(),
        Format::Csv => table.to_csv(),
        _ => table.to_markdown(),
    };
    emit(&args.out, &text)
}

fn verify_blocks(args: BlocksArgs) -> Outcome {
    let format = choose_format(&args.out, &[Format::Json, Format::Markdown], Format::Markdown, "verify-blocks")?;
    let blocks: Vec<BlockCheck> = library().iter().map(|s| BlockCheck::from(verify_spec(s))).collect();
    let mut corrections = Vec::new();
    for kind in [BlockKind::CCiX, BlockKind::C3iX] {
        for outcome in [false, true] {
            let expected = correction_contract(kind, outcome).expect("AND blocks have contracts");
            corrections.push(match derive_correction(kind, outcome) {
                Ok(rule) => CorrectionCheck::new(kind, outcome, expected, Some(rule.certificate), None),
                Err(e) => CorrectionCheck::new(kind, outcome, expected, None, Some(e.to_string())),
            });
        }
    }
    let text = match format {
        Format::Json => render::json(&render::BlocksReport { blocks: &blocks, corrections: &corrections }),
        _ => render::blocks_markdown(&blocks, &corrections),
    };
    emit(&args.out, &text)?;
    let failed: Vec<String> = blocks
        .iter()
        .filter(|b| !b.passed)
        .map(|b| b.describe_failure())
        .chain(corrections.iter().filter(|c| !c.passed).map(|c| c.describe_failure()))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("block verification failed:\n  {}", failed.join("\n  "))))
    }
}
