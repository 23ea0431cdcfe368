//! Command-line front end: solve, decide, gadget emission, and a benchmark
//! harness, all with machine-readable output.
//!
//! Output conventions follow the DIMACS solver tradition: a witness line
//! `v <lit…> 0` over the witness variables, a count line `s mc <integer>`,
//! and `s log2 <value>` with three decimals whenever the count is positive.
//! The decision form prints `s yes` or `s no`. Reports can additionally be
//! written as JSON (schema `baxcount-report/1`); with a fixed seed and
//! fixed flags the JSON is byte-identical across runs except for the
//! `timings` block.
//!
//! Exit codes: `0` for a definitive result, `124` when the time budget ran
//! out, `65` for unreadable or malformed input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cegar::{
    decide_dmaxsat, solve_maxcount, MaxCountResult, SolveStatus, SolverConfig, SolverError,
    DEFAULT_DELTA, DEFAULT_EPSILON,
};
use crate::counter::derive_parameters;
use crate::formula::{parse_instance, serialize_instance, ProblemInstance};
use crate::gadgets::{chi, GadgetError};
use crate::heuristics::DecisionHeuristic;
use crate::sat::PolarityMode;

pub const REPORT_SCHEMA: &str = "baxcount-report/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_TIMEOUT: i32 = 124;
pub const EXIT_BAD_INPUT: i32 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "baxcount",
    about = "Max#SAT: search for the witness with the most projected models",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximize the projected model count of an extended DIMACS instance.
    Solve(SolveArgs),
    /// Decide whether some witness reaches a count bound.
    Decide(DecideArgs),
    /// Emit a counting gadget as an extended DIMACS instance.
    Gadget(GadgetArgs),
    /// Solve every instance in a directory and tabulate the results.
    Bench(BenchArgs),
}

#[derive(Args, Clone, Debug)]
struct SolverFlags {
    /// Use exact counting oracles throughout.
    #[arg(long)]
    exact: bool,
    /// Relative tolerance of the probabilistic count.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Failure probability of the probabilistic count.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Early-stopping slack; derived from epsilon when omitted.
    #[arg(long)]
    kappa: Option<f64>,
    /// Candidate-selection heuristic.
    #[arg(long, default_value = "leads", value_parser = parse_heuristic)]
    heuristic: DecisionHeuristic,
    /// SAT-engine branching polarity.
    #[arg(long, default_value = "rnd", value_parser = parse_polarity)]
    polarity: PolarityMode,
    /// Disable symmetry-breaking predicates.
    #[arg(long)]
    no_symmetry: bool,
    /// Disable equivalent-literal merging.
    #[arg(long)]
    no_equiv: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time budget in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Progressive candidate batch size.
    #[arg(long)]
    progressive_q: Option<usize>,
}

impl SolverFlags {
    fn to_config(&self) -> SolverConfig {
        SolverConfig {
            exact: self.exact,
            epsilon: self.epsilon,
            delta: self.delta,
            kappa: self.kappa,
            heuristic: self.heuristic,
            polarity: self.polarity,
            symmetry: !self.no_symmetry,
            equivalences: !self.no_equiv,
            seed: self.seed,
            timeout: self.timeout.map(Duration::from_secs_f64),
            progressive_batch: self.progressive_q,
            record_trace: false,
            debug_checks: false,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance in extended DIMACS format.
    path: PathBuf,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Args, Debug)]
struct DecideArgs {
    path: PathBuf,
    /// Count bound to reach.
    bound: u128,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Args, Debug)]
struct GadgetArgs {
    #[command(subcommand)]
    which: GadgetCmd,
}

#[derive(Subcommand, Debug)]
enum GadgetCmd {
    /// Pack two CNF files: count = |M(phi)| + |M(psi)| * 2^(n+1).
    Lambda2 {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pack a family of same-arity CNF files as base-2^(n+1) digits.
    Lambdak {
        /// Input files, one per digit, lowest first (repeat the flag).
        #[arg(long, required = true)]
        phi: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Comparator over n variables with exactly c models.
    M {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        c: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold gadget: count = p * (2^n - p + 2*delta).
    Chi {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        delta: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Directory of extended DIMACS instances.
    dir: PathBuf,
    #[command(flatten)]
    flags: SolverFlags,
    /// Also write the table as CSV here (it always goes to stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Configuration echo embedded in every report.
#[derive(Serialize, Debug)]
pub struct ConfigEcho {
    pub exact: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub kappa: Option<f64>,
    pub heuristic: &'static str,
    pub polarity: &'static str,
    pub symmetry: bool,
    pub equivalences: bool,
    pub seed: u64,
    pub timeout_secs: Option<f64>,
    pub progressive_q: Option<usize>,
}

/// Derived per-call tolerances echoed in probabilistic mode.
#[derive(Serialize, Debug)]
pub struct DerivedEcho {
    pub epsilon0: f64,
    pub epsilon1: f64,
    pub kappa: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Serialize, Debug)]
pub struct StatsEcho {
    pub iterations: u64,
    pub improvements: u64,
    pub blocked_classes: u64,
    pub leads_taken: u64,
    pub generalize_calls: u64,
    pub recounts: u64,
    pub sat_calls: u64,
    pub sat_decisions: u64,
    pub count_calls: u64,
    pub merged_vars: u32,
    pub symmetry_generators: u32,
    pub lex_clauses: u32,
}

/// Wall-clock figures; the only nondeterministic part of a report.
#[derive(Serialize, Debug)]
pub struct Timings {
    pub total_ms: u128,
    pub solve_ms: u128,
}

/// Machine-readable account of one solver run.
#[derive(Serialize, Debug)]
pub struct RunReport {
    pub schema: &'static str,
    pub instance: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedEcho>,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilistic: Option<bool>,
    /// Witness as signed DIMACS literals, absent when unsatisfiable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<i64>>,
    /// Exact integer count (decimal string: counts overflow JSON numbers).
    pub count: String,
    /// Reported alongside the integer whenever the count is positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2_count: Option<f64>,
    pub upper_bound: String,
    pub exact: bool,
    pub stats: StatsEcho,
    pub timings: Timings,
}

fn parse_heuristic(s: &str) -> Result<DecisionHeuristic, String> {
    DecisionHeuristic::parse(s).ok_or_else(|| format!("unknown heuristic `{s}`"))
}

fn parse_polarity(s: &str) -> Result<PolarityMode, String> {
    PolarityMode::parse(s).ok_or_else(|| format!("unknown polarity `{s}`"))
}

/// Parse the process arguments and run; returns the exit code.
pub fn run() -> i32 {
    dispatch(Cli::parse())
}

fn dispatch(cli: Cli) -> i32 {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(&args, &mut out),
        Command::Decide(args) => cmd_decide(&args, &mut out),
        Command::Gadget(args) => cmd_gadget(&args, &mut out),
        Command::Bench(args) => cmd_bench(&args, &mut out),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_BAD_INPUT
        }
    }
}

/// Input-side failures; all map to exit code 65.
#[derive(Debug, thiserror::Error)]
enum InputError {
    #[error("{0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("{0}: {1}")]
    Parse(PathBuf, crate::formula::ParseError),
    #[error("{0}")]
    Gadget(#[from] GadgetError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn load_instance(path: &Path) -> Result<ProblemInstance, InputError> {
    let text =
        fs::read_to_string(path).map_err(|e| InputError::Read(path.to_path_buf(), e))?;
    parse_instance(&text).map_err(|e| InputError::Parse(path.to_path_buf(), e))
}

fn build_report(
    path: &Path,
    flags: &SolverFlags,
    inst: &ProblemInstance,
    result: &MaxCountResult,
    total_ms: u128,
) -> RunReport {
    let derived = (!flags.exact)
        .then(|| derive_parameters(flags.epsilon, flags.delta, inst.x_vars().len()).ok())
        .flatten()
        .map(|p| DerivedEcho {
            epsilon0: p.epsilon0,
            epsilon1: p.epsilon1,
            kappa: flags.kappa.unwrap_or(p.kappa),
            delta0: p.delta0,
            delta1: p.delta1,
            delta2: p.delta2,
        });
    RunReport {
        schema: REPORT_SCHEMA,
        instance: path.display().to_string(),
        config: ConfigEcho {
            exact: flags.exact,
            epsilon: flags.epsilon,
            delta: flags.delta,
            kappa: flags.kappa,
            heuristic: flags.heuristic.name(),
            polarity: flags.polarity.name(),
            symmetry: !flags.no_symmetry,
            equivalences: !flags.no_equiv,
            seed: flags.seed,
            timeout_secs: flags.timeout,
            progressive_q: flags.progressive_q,
        },
        derived,
        status: match result.status {
            SolveStatus::Complete => "complete",
            SolveStatus::TimedOut => "timeout",
        },
        answer: None,
        probabilistic: None,
        witness: result
            .witness
            .as_ref()
            .map(|w| w.literals().iter().map(|l| l.to_dimacs()).collect()),
        count: result.count.to_string(),
        log2_count: (result.count > 0).then(|| (result.count as f64).log2()),
        upper_bound: result.upper_bound.to_string(),
        exact: result.exact,
        stats: StatsEcho {
            iterations: result.stats.iterations,
            improvements: result.stats.improvements,
            blocked_classes: result.stats.blocked_classes,
            leads_taken: result.stats.leads_taken,
            generalize_calls: result.stats.generalize_calls,
            recounts: result.stats.recounts,
            sat_calls: result.stats.oracle.sat_calls,
            sat_decisions: result.stats.oracle.sat_decisions,
            count_calls: result.stats.oracle.count_calls,
            merged_vars: result.stats.preprocess.merged_vars,
            symmetry_generators: result.stats.preprocess.generators_found,
            lex_clauses: result.stats.preprocess.lex_clauses_added,
        },
        timings: Timings {
            total_ms,
            solve_ms: result.stats.elapsed.as_millis(),
        },
    }
}

fn write_report(report: &RunReport, path: &Path) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn print_result(result: &MaxCountResult, out: &mut impl Write) -> std::io::Result<()> {
    if let Some(w) = &result.witness {
        let mut line = String::from("v");
        for l in w.literals() {
            line.push(' ');
            line.push_str(&l.to_dimacs().to_string());
        }
        writeln!(out, "{line} 0")?;
    }
    writeln!(out, "s mc {}", result.count)?;
    if result.count > 0 {
        writeln!(out, "s log2 {:.3}", (result.count as f64).log2())?;
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs, out: &mut impl Write) -> Result<i32, InputError> {
    let started = std::time::Instant::now();
    let inst = load_instance(&args.path)?;
    let result = solve_maxcount(&inst, &args.flags.to_config())?;
    print_result(&result, out)?;
    let report = build_report(
        &args.path,
        &args.flags,
        &inst,
        &result,
        started.elapsed().as_millis(),
    );
    if let Some(path) = &args.flags.json {
        write_report(&report, path)?;
    }
    Ok(match result.status {
        SolveStatus::Complete => EXIT_OK,
        SolveStatus::TimedOut => EXIT_TIMEOUT,
    })
}

fn cmd_decide(args: &DecideArgs, out: &mut impl Write) -> Result<i32, InputError> {
    let started = std::time::Instant::now();
    let inst = load_instance(&args.path)?;
    let decision = decide_dmaxsat(&inst, args.bound, &args.flags.to_config())?;
    writeln!(out, "s {}", if decision.answer { "yes" } else { "no" })?;
    if decision.probabilistic {
        writeln!(out, "c probabilistic: holds up to the configured (epsilon, delta)")?;
    }
    let mut report = build_report(
        &args.path,
        &args.flags,
        &inst,
        &decision.result,
        started.elapsed().as_millis(),
    );
    report.answer = Some(if decision.answer { "yes" } else { "no" });
    report.probabilistic = Some(decision.probabilistic);
    if let Some(path) = &args.flags.json {
        write_report(&report, path)?;
    }
    Ok(match decision.result.status {
        SolveStatus::Complete => EXIT_OK,
        SolveStatus::TimedOut => EXIT_TIMEOUT,
    })
}

fn load_gadget_input(path: &Path) -> Result<crate::gadgets::GadgetFormula, InputError> {
    let inst = load_instance(path)?;
    Ok(crate::gadgets::GadgetFormula::from_clauses(
        inst.num_vars(),
        inst.clauses(),
    )?)
}

fn cmd_gadget(args: &GadgetArgs, out: &mut impl Write) -> Result<i32, InputError> {
    let (formula, target) = match &args.which {
        GadgetCmd::Lambda2 { phi, psi, out } => (
            crate::gadgets::lambda2(&load_gadget_input(phi)?, &load_gadget_input(psi)?)?,
            out,
        ),
        GadgetCmd::Lambdak { phi, out } => {
            let family = phi
                .iter()
                .map(|p| load_gadget_input(p))
                .collect::<Result<Vec<_>, _>>()?;
            (crate::gadgets::lambda_k(&family)?, out)
        }
        GadgetCmd::M { n, c, out } => (crate::gadgets::m_gadget(*n, *c)?, out),
        GadgetCmd::Chi { phi, delta, out } => (chi(&load_gadget_input(phi)?, *delta)?, out),
    };
    let text = serialize_instance(&formula.to_instance());
    match target {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize, Debug)]
struct BenchRow {
    name: String,
    status: &'static str,
    count: String,
    log2_count: Option<f64>,
    time_ms: u128,
}

fn csv_line(row: &BenchRow) -> String {
    format!(
        "{},{},{},{},{}\n",
        row.name,
        row.time_ms,
        row.count,
        row.log2_count.map_or(String::new(), |l| format!("{l:.3}")),
        row.status
    )
}

const BENCH_HEADER: &str = "name,time_ms,mc,log2_count,status\n";

fn cmd_bench(args: &BenchArgs, out: &mut impl Write) -> Result<i32, InputError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|ext| ext == "cnf" || ext == "dimacs")
        })
        .collect();
    paths.sort();

    let mut rows = Vec::new();
    for path in &paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let started = std::time::Instant::now();
        let row = match load_instance(path)
            .and_then(|inst| Ok(solve_maxcount(&inst, &args.flags.to_config())?))
        {
            Ok(result) => BenchRow {
                name,
                status: match result.status {
                    SolveStatus::Complete => "complete",
                    SolveStatus::TimedOut => "timeout",
                },
                count: result.count.to_string(),
                log2_count: (result.count > 0).then(|| (result.count as f64).log2()),
                time_ms: started.elapsed().as_millis(),
            },
            Err(err) => {
                eprintln!("warning: skipping {name}: {err}");
                BenchRow {
                    name,
                    status: "error",
                    count: String::new(),
                    log2_count: None,
                    time_ms: started.elapsed().as_millis(),
                }
            }
        };
        rows.push(row);
    }

    out.write_all(BENCH_HEADER.as_bytes())?;
    let mut csv = String::from(BENCH_HEADER);
    for row in &rows {
        let line = csv_line(row);
        out.write_all(line.as_bytes())?;
        csv.push_str(&line);
    }
    if let Some(path) = &args.csv {
        fs::write(path, &csv)?;
    }
    if let Some(path) = &args.flags.json {
        let doc = serde_json::json!({
            "schema": REPORT_SCHEMA,
            "kind": "bench",
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("rows serialize");
        text.push('\n');
        fs::write(path, text)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn arg_grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn solve_prints_witness_count_and_log() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t1.cnf");
        fs::write(&path, "p cnf 3 1\nc max 1 0\nc ind 2 3 0\n-1 2 0\n").unwrap();
        let cli = Cli::parse_from([
            "baxcount",
            "solve",
            path.to_str().unwrap(),
            "--exact",
            "--seed",
            "3",
        ]);
        let Command::Solve(args) = cli.command else {
            panic!("expected solve");
        };
        let mut out = Vec::new();
        let code = cmd_solve(&args, &mut out).unwrap();
        assert_eq!(code, EXIT_OK);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("v -1 0\n"), "got: {text}");
        assert!(text.contains("s mc 4\n"), "got: {text}");
        assert!(text.contains("s log2 2.000\n"), "got: {text}");
    }

    #[test]
    fn unsat_omits_witness_and_log_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("unsat.cnf");
        fs::write(&path, "p cnf 2 2\nc max 1 0\nc ind 2 0\n1 0\n-1 0\n").unwrap();
        let cli = Cli::parse_from(["baxcount", "solve", path.to_str().unwrap(), "--exact"]);
        let Command::Solve(args) = cli.command else {
            panic!("expected solve");
        };
        let mut out = Vec::new();
        cmd_solve(&args, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "s mc 0\n");
    }

    #[test]
    fn decide_answers_both_ways() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t1.cnf");
        fs::write(&path, "p cnf 3 1\nc max 1 0\nc ind 2 3 0\n-1 2 0\n").unwrap();
        for (bound, expected) in [("4", "s yes\n"), ("5", "s no\n"), ("0", "s yes\n")] {
            let cli = Cli::parse_from([
                "baxcount",
                "decide",
                path.to_str().unwrap(),
                bound,
                "--exact",
            ]);
            let Command::Decide(args) = cli.command else {
                panic!("expected decide");
            };
            let mut out = Vec::new();
            assert_eq!(cmd_decide(&args, &mut out).unwrap(), EXIT_OK);
            assert_eq!(String::from_utf8(out).unwrap(), expected, "bound {bound}");
        }
    }

    #[test]
    fn gadget_emits_reparsable_dimacs_with_the_promised_count() {
        let cli = Cli::parse_from(["baxcount", "gadget", "m", "--n", "3", "--c", "5"]);
        let Command::Gadget(args) = cli.command else {
            panic!("expected gadget");
        };
        let mut out = Vec::new();
        assert_eq!(cmd_gadget(&args, &mut out).unwrap(), EXIT_OK);
        let inst = parse_instance(&String::from_utf8(out).unwrap()).unwrap();
        let count =
            crate::formula::brute::count_partial(&inst, &crate::formula::PartialWitness::new())
                .unwrap();
        assert_eq!(count, 5);
    }

    #[test]
    fn bench_tabulates_a_directory_sorted_by_name() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("b.cnf"),
            "p cnf 3 1\nc max 1 0\nc ind 2 3 0\n-1 2 0\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("a.cnf"),
            "p cnf 2 1\nc max 1 0\nc ind 2 0\n-1 2 0\n",
        )
        .unwrap();
        fs::write(dir.path().join("notes.txt"), "not an instance").unwrap();
        let cli = Cli::parse_from([
            "baxcount",
            "bench",
            dir.path().to_str().unwrap(),
            "--exact",
        ]);
        let Command::Bench(args) = cli.command else {
            panic!("expected bench");
        };
        let mut out = Vec::new();
        assert_eq!(cmd_bench(&args, &mut out).unwrap(), EXIT_OK);
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name,time_ms,mc,log2_count,status");
        assert!(lines[1].starts_with("a.cnf,"), "got: {}", lines[1]);
        assert!(lines[1].contains(",2,1.000,complete"), "got: {}", lines[1]);
        assert!(lines[2].starts_with("b.cnf,"), "got: {}", lines[2]);
        assert!(lines[2].contains(",4,2.000,complete"), "got: {}", lines[2]);
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn bench_of_an_empty_directory_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cli = Cli::parse_from(["baxcount", "bench", dir.path().to_str().unwrap()]);
        let Command::Bench(args) = cli.command else {
            panic!("expected bench");
        };
        let mut out = Vec::new();
        assert_eq!(cmd_bench(&args, &mut out).unwrap(), EXIT_OK);
        assert_eq!(String::from_utf8(out).unwrap(), BENCH_HEADER);
    }
}
