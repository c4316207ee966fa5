//! Command-line front end for the nilpotent equation toolkit.
//!
//! Subcommands map onto the library pipeline: `decide` and `reduce` work
//! over a presented group, `encode` and `verify` work over free nilpotent
//! groups, and `oracle-search` exhausts a coordinate box. Reports are
//! byte-identical across runs for identical inputs unless `--timing` is
//! set, which adds wall-clock fields.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use neq_core::config::SolverConfig;
use neq_core::decide::{decide_equation, Certificate, DecisionResult, Witness};
use neq_core::encode::{encode_higher_step, encode_two_step, parse_dioph_system};
use neq_core::magnus::{magnus_eval_word, FreeNilpotentSpec, TruncatedFreePoly};
use neq_core::presentation::{parse_presentation, validate_presentation, MalcevPresentation};
use neq_core::reduce::reduce_equation;
use neq_core::search::{bounded_search, SearchError, DEFAULT_STATE_BUDGET};
use neq_core::word::{parse_equation, parse_system, Equation, EquationSystem};

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;

#[derive(Parser)]
#[command(
    name = "neq",
    version,
    about = "Equation solving over finitely generated class-2 nilpotent groups"
)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Add wall-clock timing to reports. Timed reports are not
    /// byte-reproducible.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether one equation has a solution in the presented group.
    Decide(SourceArgs),
    /// Show the torsion branches and integer constraints for one equation.
    Reduce(SourceArgs),
    /// Rewrite a quadratic Diophantine system as equations over a free
    /// nilpotent group.
    Encode(EncodeArgs),
    /// Check a ground assignment against equations over a free nilpotent
    /// group.
    Verify(VerifyArgs),
    /// Exhaust a coordinate box looking for a solution of a system.
    OracleSearch(SearchArgs),
}

#[derive(Args)]
#[command(group = ArgGroup::new("source").required(true).args(["eq", "file"]))]
struct SourceArgs {
    /// Presentation file.
    #[arg(long, value_name = "FILE")]
    group: PathBuf,
    /// Equation given inline.
    #[arg(long, value_name = "EQUATION")]
    eq: Option<String>,
    /// File holding the input equation(s).
    #[arg(long, value_name = "FILE")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Target group family.
    #[arg(long, value_enum)]
    target: Target,
    /// Rank of the ambient free nilpotent group.
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Nilpotency step; only used (and required) with --target higher-step.
    #[arg(long)]
    step: Option<usize>,
    /// JSON file holding the quadratic Diophantine system.
    #[arg(long, value_name = "FILE")]
    system: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    TwoStep,
    HigherStep,
}

#[derive(Args)]
struct VerifyArgs {
    /// File with equations over the free nilpotent group.
    #[arg(long, value_name = "FILE")]
    system: PathBuf,
    /// JSON file mapping each unknown to a ground word.
    #[arg(long, value_name = "FILE")]
    assignment: PathBuf,
    /// Nilpotency step of the ambient free group.
    #[arg(long, default_value_t = 2)]
    step: usize,
    /// Rank of the ambient free group.
    #[arg(long, default_value_t = 2)]
    rank: usize,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Max-norm bound on the unbounded coordinates.
    #[arg(long)]
    bound: u64,
    /// Largest number of assignments the search may enumerate.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET as u64)]
    budget: u64,
}

/// Terminal failure carrying its exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let started = Instant::now();
    match &cli.command {
        Command::Decide(args) => run_decide(args, &cli, started),
        Command::Reduce(args) => run_reduce(args, &cli, started),
        Command::Encode(args) => run_encode(args, &cli, started),
        Command::Verify(args) => run_verify(args, &cli, started),
        Command::OracleSearch(args) => run_search(args, &cli, started),
    }
}

/// Applies NEQ_* environment overrides on top of the default budgets.
fn config_from_env() -> Result<SolverConfig, Failure> {
    let mut cfg = SolverConfig::default();
    override_from_env("NEQ_SEARCH_BOUND", &mut cfg.search_bound)?;
    override_from_env("NEQ_MODULUS_LIMIT", &mut cfg.modulus_limit)?;
    override_from_env("NEQ_BRANCH_BUDGET", &mut cfg.branch_budget)?;
    override_from_env("NEQ_RESIDUE_BUDGET", &mut cfg.residue_budget)?;
    override_from_env("NEQ_TIME_BUDGET", &mut cfg.time_budget_secs)?;
    Ok(cfg)
}

fn override_from_env(name: &str, slot: &mut u64) -> Result<(), Failure> {
    match std::env::var(name) {
        Ok(text) => match text.trim().parse::<u64>() {
            Ok(value) if value > 0 => {
                *slot = value;
                Ok(())
            }
            _ => Err(Failure::usage(format!("{name} must be a positive integer, got '{text}'"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(err) => Err(Failure::usage(format!("{name}: {err}"))),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|err| Failure::input(format!("cannot read {}: {err}", path.display())))
}

fn load_group(path: &Path) -> Result<MalcevPresentation, Failure> {
    let text = read_file(path)?;
    let p = parse_presentation(&text)
        .map_err(|err| Failure::input(format!("{}: {err}", path.display())))?;
    let violations = validate_presentation(&p);
    if !violations.is_empty() {
        let mut message = format!("{} is not a consistent presentation:", path.display());
        for v in &violations {
            let _ = write!(message, "\n  {v}");
        }
        return Err(Failure::input(message));
    }
    Ok(p)
}

/// Loads the equations named by `--eq`/`--file` as a system.
fn load_system(args: &SourceArgs, p: &MalcevPresentation) -> Result<EquationSystem, Failure> {
    if let Some(text) = &args.eq {
        let eq = parse_equation(text, p)
            .map_err(|err| Failure::input(format!("--eq '{text}': {err}")))?;
        Ok(EquationSystem::new(vec![eq]))
    } else {
        let path = args.file.as_ref().expect("clap enforces eq xor file");
        let text = read_file(path)?;
        parse_system(&text, p).map_err(|err| Failure::input(format!("{}: {err}", path.display())))
    }
}

/// Like [`load_system`] but insists on a single equation.
fn load_single_equation(args: &SourceArgs, p: &MalcevPresentation) -> Result<Equation, Failure> {
    let system = load_system(args, p)?;
    match system.equations.len() {
        1 => Ok(system.equations.into_iter().next().expect("checked length")),
        n => Err(Failure::input(format!("expected exactly one equation, found {n}"))),
    }
}

fn elapsed_field(cli: &Cli, started: Instant) -> Option<u128> {
    cli.timing.then(|| started.elapsed().as_millis())
}

/// Prints a report in the selected format and returns the exit code.
fn emit<R: Serialize>(cli: &Cli, report: &R, text: String, code: u8) -> Result<u8, Failure> {
    match cli.format {
        Format::Text => print!("{text}"),
        Format::Json => {
            let body = serde_json::to_string_pretty(report).expect("reports serialize");
            println!("{body}");
        }
    }
    Ok(code)
}

fn push_timing(text: &mut String, elapsed: Option<u128>) {
    if let Some(ms) = elapsed {
        let _ = writeln!(text, "elapsed: {ms} ms");
    }
}

#[derive(Serialize)]
struct DecideReport {
    command: &'static str,
    group: String,
    equation: String,
    verdict: &'static str,
    /// Surviving torsion branches; absent when reduction itself failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

fn run_decide(args: &SourceArgs, cli: &Cli, started: Instant) -> Result<u8, Failure> {
    let cfg = config_from_env()?;
    let p = load_group(&args.group)?;
    let equation = load_single_equation(args, &p)?;

    let branches = reduce_equation(&p, &equation, cfg.branch_budget)
        .ok()
        .map(|reduced| reduced.branches.len());
    let result = decide_equation(&equation, &p, &cfg);

    let mut report = DecideReport {
        command: "decide",
        group: args.group.display().to_string(),
        equation: equation.to_string(),
        verdict: "unknown",
        branches,
        witness: None,
        certificate: None,
        search_bound: None,
        reason: None,
        elapsed_ms: elapsed_field(cli, started),
    };
    let code = match result {
        DecisionResult::Sat(witness) => {
            report.verdict = "sat";
            report.witness = Some(render_witness(&witness));
            EXIT_SAT
        }
        DecisionResult::Unsat(certificate) => {
            report.verdict = "unsat";
            report.certificate = Some(certificate);
            EXIT_UNSAT
        }
        DecisionResult::Unknown { search_bound, reason } => {
            report.search_bound = Some(search_bound);
            report.reason = reason;
            EXIT_UNKNOWN
        }
    };

    let mut text = String::new();
    let _ = writeln!(text, "equation: {}", report.equation);
    if let Some(n) = report.branches {
        let _ = writeln!(text, "branches: {n}");
    }
    let _ = writeln!(text, "verdict: {}", report.verdict);
    if let Some(witness) = &report.witness {
        if witness.is_empty() {
            let _ = writeln!(text, "witness: (no unknowns)");
        } else {
            let _ = writeln!(text, "witness:");
            for (var, word) in witness {
                let _ = writeln!(text, "  {var} = {word}");
            }
        }
    }
    if let Some(certificate) = &report.certificate {
        let body = serde_json::to_string_pretty(certificate).expect("certificates serialize");
        let _ = writeln!(text, "certificate: {body}");
    }
    if let Some(bound) = report.search_bound {
        let _ = writeln!(text, "search bound: {bound}");
    }
    if let Some(reason) = &report.reason {
        let _ = writeln!(text, "reason: {reason}");
    }
    push_timing(&mut text, report.elapsed_ms);
    emit(cli, &report, text, code)
}

fn render_witness(witness: &Witness) -> BTreeMap<String, String> {
    match witness {
        Witness::Group(map) => {
            map.iter().map(|(var, coord)| (var.clone(), coord.to_word_string())).collect()
        }
        Witness::Integers(point) => point
            .iter()
            .enumerate()
            .map(|(i, value)| (format!("y{i}"), value.to_string()))
            .collect(),
    }
}

#[derive(Serialize)]
struct ReduceReport {
    command: &'static str,
    group: String,
    equation: String,
    variables: Vec<String>,
    unknowns: Vec<String>,
    branches: Vec<BranchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

#[derive(Serialize)]
struct BranchReport {
    /// Torsion coordinates per unknown: name -> (b exponents, d exponents).
    torsion: BTreeMap<String, (Vec<u64>, Vec<u64>)>,
    linear: Vec<String>,
    congruences: Vec<String>,
    quadratic: String,
}

fn run_reduce(args: &SourceArgs, cli: &Cli, started: Instant) -> Result<u8, Failure> {
    let cfg = config_from_env()?;
    let p = load_group(&args.group)?;
    let equation = load_single_equation(args, &p)?;

    let reduced = match reduce_equation(&p, &equation, cfg.branch_budget) {
        Ok(reduced) => reduced,
        Err(err) => {
            // Budget exhaustion is the Unknown outcome of this stage.
            let report = serde_json::json!({
                "command": "reduce",
                "group": args.group.display().to_string(),
                "equation": equation.to_string(),
                "verdict": "unknown",
                "reason": err.to_string(),
            });
            let text = format!("equation: {equation}\nverdict: unknown\nreason: {err}\n");
            return emit(cli, &report, text, EXIT_UNKNOWN);
        }
    };

    let unknowns: Vec<String> =
        (0..reduced.unknowns.len()).map(|i| reduced.unknowns.name(i).to_string()).collect();
    let branches: Vec<BranchReport> = reduced
        .branches
        .iter()
        .map(|branch| BranchReport {
            torsion: branch
                .assignment
                .iter()
                .map(|(var, t)| (var.clone(), (t.b.clone(), t.d.clone())))
                .collect(),
            linear: branch
                .linear
                .iter()
                .map(|row| format!("{} = 0", row.display(&reduced.unknowns)))
                .collect(),
            congruences: branch
                .congruences
                .iter()
                .map(|(row, m)| format!("{} = 0 (mod {m})", row.display(&reduced.unknowns)))
                .collect(),
            quadratic: format!("{} = 0", branch.quadratic.display(&reduced.unknowns)),
        })
        .collect();

    let report = ReduceReport {
        command: "reduce",
        group: args.group.display().to_string(),
        equation: equation.to_string(),
        variables: reduced.variables.clone(),
        unknowns,
        branches,
        elapsed_ms: elapsed_field(cli, started),
    };

    let mut text = String::new();
    let _ = writeln!(text, "equation: {}", report.equation);
    let _ = writeln!(text, "variables: {}", join_or_none(&report.variables));
    let _ = writeln!(text, "unknowns: {}", join_or_none(&report.unknowns));
    let _ = writeln!(text, "branches: {}", report.branches.len());
    for (i, branch) in report.branches.iter().enumerate() {
        let _ = writeln!(text, "branch {}:", i + 1);
        let shows_torsion = p.num_b() + p.num_d() > 0;
        if shows_torsion {
            for (var, (b, d)) in &branch.torsion {
                let _ = writeln!(text, "  torsion {var}: b={b:?} d={d:?}");
            }
        }
        for row in &branch.linear {
            let _ = writeln!(text, "  linear: {row}");
        }
        for row in &branch.congruences {
            let _ = writeln!(text, "  congruence: {row}");
        }
        let _ = writeln!(text, "  quadratic: {}", branch.quadratic);
    }
    push_timing(&mut text, report.elapsed_ms);
    emit(cli, &report, text, EXIT_SAT)
}

fn join_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".to_string()
    } else {
        items.join(", ")
    }
}

#[derive(Serialize)]
struct EncodeReport {
    command: &'static str,
    target: &'static str,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
    variables: Vec<String>,
    equations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

fn run_encode(args: &EncodeArgs, cli: &Cli, started: Instant) -> Result<u8, Failure> {
    let text = read_file(&args.system)?;
    let sigma = parse_dioph_system(&text)
        .map_err(|err| Failure::input(format!("{}: {err}", args.system.display())))?;

    let (system, target, step) = match args.target {
        Target::TwoStep => {
            if args.rank < 2 {
                return Err(Failure::usage("--target two-step needs --rank >= 2"));
            }
            if args.step.is_some() {
                return Err(Failure::usage("--step only applies to --target higher-step"));
            }
            (encode_two_step(&sigma, args.rank), "two-step", None)
        }
        Target::HigherStep => {
            let step = args
                .step
                .ok_or_else(|| Failure::usage("--target higher-step needs --step"))?;
            if step < 3 {
                return Err(Failure::usage("--target higher-step needs --step >= 3"));
            }
            if args.rank < 2 {
                return Err(Failure::usage("--target higher-step needs --rank >= 2"));
            }
            let spec = FreeNilpotentSpec::new(step, args.rank);
            let system = encode_higher_step(&sigma, &spec)
                .map_err(|err| Failure::input(err.to_string()))?;
            (system, "higher-step", Some(step))
        }
    };

    let report = EncodeReport {
        command: "encode",
        target,
        rank: args.rank,
        step,
        variables: system.variables.clone(),
        equations: system.equations.iter().map(|eq| eq.to_string()).collect(),
        elapsed_ms: elapsed_field(cli, started),
    };

    // Text output round-trips through the system parser unchanged.
    let mut text = String::new();
    if !report.variables.is_empty() {
        let _ = writeln!(text, "vars: {}", report.variables.join(" "));
    }
    for eq in &report.equations {
        let _ = writeln!(text, "{eq}");
    }
    push_timing(&mut text, report.elapsed_ms);
    emit(cli, &report, text, EXIT_SAT)
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    step: usize,
    rank: usize,
    results: Vec<VerifyLine>,
    all_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

#[derive(Serialize)]
struct VerifyLine {
    equation: String,
    holds: bool,
}

fn run_verify(args: &VerifyArgs, cli: &Cli, started: Instant) -> Result<u8, Failure> {
    if args.step < 2 || args.rank < 2 {
        return Err(Failure::usage("verify needs --step >= 2 and --rank >= 2"));
    }
    let spec = FreeNilpotentSpec::new(args.step, args.rank);
    let shell = MalcevPresentation::free_shell(args.rank);

    let system_text = read_file(&args.system)?;
    let system = parse_system(&system_text, &shell)
        .map_err(|err| Failure::input(format!("{}: {err}", args.system.display())))?;

    let assignment_text = read_file(&args.assignment)?;
    let words: BTreeMap<String, String> = serde_json::from_str(&assignment_text)
        .map_err(|err| Failure::input(format!("{}: {err}", args.assignment.display())))?;

    let empty = BTreeMap::new();
    let mut assignment: BTreeMap<String, TruncatedFreePoly> = BTreeMap::new();
    for (var, text) in &words {
        let word = parse_word_for_assignment(text, &shell, var)?;
        let value = magnus_eval_word(&word, &empty, &spec).map_err(|err| {
            Failure::input(format!("assignment for '{var}' must be a ground word: {err}"))
        })?;
        assignment.insert(var.clone(), value);
    }

    let mut results = Vec::new();
    let mut all_hold = true;
    for eq in &system.equations {
        let value = magnus_eval_word(&eq.normalized_word(), &assignment, &spec)
            .map_err(|err| Failure::input(err.to_string()))?;
        let holds = value.is_one();
        all_hold &= holds;
        results.push(VerifyLine { equation: eq.to_string(), holds });
    }

    let held = results.iter().filter(|line| line.holds).count();
    let report = VerifyReport {
        command: "verify",
        step: args.step,
        rank: args.rank,
        results,
        all_hold,
        elapsed_ms: elapsed_field(cli, started),
    };

    let mut text = String::new();
    for line in &report.results {
        let tag = if line.holds { "holds" } else { "fails" };
        let _ = writeln!(text, "{tag}: {}", line.equation);
    }
    let _ = writeln!(text, "{held} of {} equations hold", report.results.len());
    push_timing(&mut text, report.elapsed_ms);
    emit(cli, &report, text, if report.all_hold { EXIT_SAT } else { EXIT_UNSAT })
}

fn parse_word_for_assignment(
    text: &str,
    shell: &MalcevPresentation,
    var: &str,
) -> Result<neq_core::word::Word, Failure> {
    neq_core::word::parse_word(text, shell)
        .map_err(|err| Failure::input(format!("assignment for '{var}': {err}")))
}

#[derive(Serialize)]
struct SearchReport {
    command: &'static str,
    group: String,
    equations: Vec<String>,
    bound: u64,
    budget: u64,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    states: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

fn run_search(args: &SearchArgs, cli: &Cli, started: Instant) -> Result<u8, Failure> {
    let p = load_group(&args.source.group)?;
    let system = load_system(&args.source, &p)?;

    let mut report = SearchReport {
        command: "oracle-search",
        group: args.source.group.display().to_string(),
        equations: system.equations.iter().map(|eq| eq.to_string()).collect(),
        bound: args.bound,
        budget: args.budget,
        outcome: "exhausted",
        witness: None,
        states: None,
        elapsed_ms: None,
    };
    let code = match bounded_search(&system, &p, args.bound, args.budget as u128) {
        Ok(Some(witness)) => {
            report.outcome = "found";
            report.witness = Some(
                witness.iter().map(|(var, coord)| (var.clone(), coord.to_word_string())).collect(),
            );
            EXIT_SAT
        }
        Ok(None) => EXIT_UNSAT,
        Err(SearchError::Budget { states, .. }) => {
            report.outcome = "budget-exceeded";
            report.states = Some(states);
            EXIT_UNKNOWN
        }
    };
    report.elapsed_ms = elapsed_field(cli, started);

    let mut text = String::new();
    for eq in &report.equations {
        let _ = writeln!(text, "equation: {eq}");
    }
    let _ = writeln!(text, "bound: {}", report.bound);
    match report.outcome {
        "found" => {
            let witness = report.witness.as_ref().expect("found implies witness");
            if witness.is_empty() {
                let _ = writeln!(text, "found: (no unknowns)");
            } else {
                let _ = writeln!(text, "found:");
                for (var, word) in witness {
                    let _ = writeln!(text, "  {var} = {word}");
                }
            }
        }
        "exhausted" => {
            let _ = writeln!(text, "no solution with max-norm <= {}", report.bound);
        }
        _ => {
            let states = report.states.expect("budget outcome records the state count");
            let _ = writeln!(
                text,
                "budget exceeded: box holds {states} assignments, budget is {}",
                report.budget
            );
        }
    }
    push_timing(&mut text, report.elapsed_ms);
    emit(cli, &report, text, code)
}
