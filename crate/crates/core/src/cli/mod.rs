//! Command-line front end: solving, benchmarking and derivation replay.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{canonical, parse_dimacs, CnfError, Formula, Lit};
use crate::engine::{DsMode, EngineError, RestartPolicy, SolveOutcome, Solver, SolverConfig, Stats};
use crate::proof::checker::{check_drat, parse_drat};
use crate::proof::ProofLogger;

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 0;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Cnf { path: PathBuf, source: CnfError },
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{path}:{line}: {message}")]
    Script { path: PathBuf, line: usize, message: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("proof check failed: {0}")]
    Proof(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_formula(path: &Path) -> Result<Formula, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_dimacs(BufReader::new(file)).map_err(|source| CliError::Cnf {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(name = "dssat", version, about = "CDCL SAT solver with dynamic subsumption")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one DIMACS instance.
    Solve(SolveArgs),
    /// Run every instance of a manifest under each mode and write CSV.
    Bench(BenchArgs),
    /// Replay an explicit decision script up to the first conflict.
    Replay(ReplayArgs),
    /// Print a generated instance in DIMACS.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Check a DRAT proof with the built-in checker.
    Check(CheckArgs),
}

/// Search options shared by `solve` and `bench`.
#[derive(Debug, Clone, Default, Args)]
pub struct SearchFlags {
    /// `luby:<base>`, `geo:<factor>` or `never`.
    #[arg(long, default_value = "luby:32", value_parser = parse_restart)]
    pub restart: RestartPolicy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub conflict_budget: Option<u64>,
    /// Seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
}

impl SearchFlags {
    pub fn config(&self, mode: DsMode) -> Result<SolverConfig, CliError> {
        let time_budget = match self.time_budget {
            Some(t) if !(t.is_finite() && t >= 0.0) => {
                return Err(CliError::Argument(format!("bad time budget {t}")))
            }
            t => t.map(Duration::from_secs_f64),
        };
        let config = SolverConfig {
            ds_mode: mode,
            restart: self.restart,
            seed: self.seed,
            conflict_budget: self.conflict_budget,
            time_budget,
            ..SolverConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_mode(s: &str) -> Result<DsMode, String> {
    DsMode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (expected off, otf or general)"))
}

pub fn parse_restart(s: &str) -> Result<RestartPolicy, String> {
    const GEO_FIRST: u64 = 100;
    if s == "never" {
        return Ok(RestartPolicy::Never);
    }
    let (kind, arg) = s.split_once(':').ok_or_else(|| format!("bad restart policy `{s}`"))?;
    match kind {
        "luby" => arg
            .parse()
            .ok()
            .filter(|&b: &u64| b > 0)
            .map(|base| RestartPolicy::Luby { base })
            .ok_or_else(|| format!("bad luby base `{arg}`")),
        "geo" => arg
            .parse()
            .ok()
            .filter(|&f: &f64| f >= 1.0 && f.is_finite())
            .map(|factor| RestartPolicy::Geometric {
                first: GEO_FIRST,
                factor,
            })
            .ok_or_else(|| format!("bad geometric factor `{arg}`")),
        _ => Err(format!("bad restart policy `{s}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    /// `off`, `otf` or `general`.
    #[arg(long, default_value = "otf", value_parser = parse_mode)]
    pub ds: DsMode,
    /// Write a DRAT proof to this file.
    #[arg(long)]
    pub proof: Option<PathBuf>,
    /// Print statistics as one JSON object instead of `c` lines.
    #[arg(long)]
    pub stats_json: bool,
    #[command(flatten)]
    pub search: SearchFlags,
}

pub fn format_model(model: &[bool]) -> String {
    let mut out = String::new();
    let mut line = String::from("v");
    for (i, &b) in model.iter().enumerate() {
        let lit = if b { (i + 1) as i64 } else { -((i + 1) as i64) };
        let tok = format!(" {lit}");
        if line.len() + tok.len() > 78 {
            out.push_str(&line);
            out.push('\n');
            line = String::from("v");
        }
        line.push_str(&tok);
    }
    line.push_str(" 0");
    out.push_str(&line);
    out.push('\n');
    out
}

pub fn format_stats(stats: &Stats) -> String {
    let mut s = String::new();
    let rows: [(&str, String); 12] = [
        ("decisions", stats.decisions.to_string()),
        ("propagations", stats.propagations.to_string()),
        ("conflicts", stats.conflicts.to_string()),
        ("restarts", stats.restarts.to_string()),
        ("learnt_clauses", stats.learnt_clauses.to_string()),
        ("db_reductions", stats.db_reductions.to_string()),
        ("subsumed_original", stats.subsumed_original.to_string()),
        ("subsumed_learnt", stats.subsumed_learnt.to_string()),
        ("literals_removed", stats.literals_removed.to_string()),
        ("stale_requests", stats.stale_requests.to_string()),
        ("multi_request_conflicts", stats.multi_request_conflicts.to_string()),
        ("cpu_s", format!("{:.3}", stats.cpu_time)),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "c {k:<24} {v}");
    }
    s
}

/// Runs `solve`, writing competition output to `out`. Returns the exit code.
pub fn solve_command(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match solve_inner(args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn solve_inner(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = args.search.config(args.ds)?;
    let formula = read_formula(&args.path)?;
    let wall = Instant::now();
    let mut solver = Solver::new(&formula, config)?;
    if let Some(path) = &args.proof {
        solver.set_proof(ProofLogger::to_file(path).map_err(io_err(path))?);
    }
    let outcome = solver.solve();
    let wall_s = wall.elapsed().as_secs_f64();
    let mut proof = solver.take_proof();
    proof.flush();
    if !proof.is_complete() {
        return Err(CliError::Proof("proof file could not be written completely".into()));
    }
    let w = |e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    if args.stats_json {
        let json = serde_json::to_string(solver.stats()).expect("stats serialize");
        writeln!(out, "c stats {json}").map_err(w)?;
    } else {
        write!(out, "{}", format_stats(solver.stats())).map_err(w)?;
        writeln!(out, "c {:<24} {wall_s:.3}", "wall_s").map_err(w)?;
    }
    let code = match &outcome {
        SolveOutcome::Sat(model) => {
            writeln!(out, "s SATISFIABLE").map_err(w)?;
            write!(out, "{}", format_model(model)).map_err(w)?;
            EXIT_SAT
        }
        SolveOutcome::Unsat => {
            writeln!(out, "s UNSATISFIABLE").map_err(w)?;
            EXIT_UNSAT
        }
        SolveOutcome::Unknown => {
            writeln!(out, "s UNKNOWN").map_err(w)?;
            EXIT_UNKNOWN
        }
    };
    Ok(code)
}

// ---- bench ----------------------------------------------------------------

/// One CSV row: an instance solved under one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub mode: String,
    pub verdict: String,
    pub cpu_s: f64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub subsumed_orig: u64,
    pub subsumed_learnt: u64,
    pub literals_removed: u64,
    pub seed: u64,
}

impl RunRecord {
    pub fn new(instance: &str, mode: DsMode, outcome: &SolveOutcome, stats: &Stats, seed: u64) -> Self {
        RunRecord {
            instance: instance.to_string(),
            mode: mode.name().to_string(),
            verdict: outcome.verdict().to_string(),
            cpu_s: stats.cpu_time,
            conflicts: stats.conflicts,
            decisions: stats.decisions,
            propagations: stats.propagations,
            subsumed_orig: stats.subsumed_original,
            subsumed_learnt: stats.subsumed_learnt,
            literals_removed: stats.literals_removed,
            seed,
        }
    }

    fn failed(instance: &str, mode: DsMode, seed: u64) -> Self {
        RunRecord::new(instance, mode, &SolveOutcome::Unknown, &Stats::default(), seed)
    }
}

pub const CSV_HEADER: &str =
    "instance,mode,verdict,cpu_s,conflicts,decisions,propagations,subsumed_orig,subsumed_learnt,literals_removed,seed";

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<RunRecord>, CliError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for r in rd.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// File listing one instance path per line (relative paths resolve against its directory).
    pub manifest: PathBuf,
    /// Comma-separated modes.
    #[arg(long, default_value = "off,otf", value_delimiter = ',', value_parser = parse_mode)]
    pub modes: Vec<DsMode>,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchFlags,
}

pub fn read_manifest(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = Path::new(line);
        out.push(if p.is_absolute() { p.to_path_buf() } else { base.join(p) });
    }
    Ok(out)
}

/// A failed (instance, mode) run; its row is reported as UNKNOWN.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchFailure {
    pub instance: String,
    pub mode: String,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub failures: Vec<BenchFailure>,
}

/// Runs each instance under each mode with identical budgets and seed.
pub fn run_bench(instances: &[PathBuf], modes: &[DsMode], flags: &SearchFlags) -> Result<BenchReport, CliError> {
    let mut report = BenchReport::default();
    let configs: Vec<SolverConfig> = modes.iter().map(|&m| flags.config(m)).collect::<Result<_, _>>()?;
    for path in instances {
        let name = path.display().to_string();
        let formula = read_formula(path);
        for (&mode, config) in modes.iter().zip(&configs) {
            let run = formula
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|f| Solver::new(f, config.clone()).map_err(|e| e.to_string()));
            match run {
                Ok(mut solver) => {
                    let outcome = solver.solve();
                    report
                        .records
                        .push(RunRecord::new(&name, mode, &outcome, solver.stats(), flags.seed));
                }
                Err(note) => {
                    report.failures.push(BenchFailure {
                        instance: name.clone(),
                        mode: mode.name().to_string(),
                        note,
                    });
                    report.records.push(RunRecord::failed(&name, mode, flags.seed));
                }
            }
        }
    }
    Ok(report)
}

/// Per mode, the number of instances on which it had the strictly lowest CPU
/// time among runs that did not end UNKNOWN.
pub fn faster_counts(records: &[RunRecord]) -> BTreeMap<String, usize> {
    let mut by_instance: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_instance.entry(&r.instance).or_default().push(r);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in records {
        counts.entry(r.mode.clone()).or_insert(0);
    }
    for runs in by_instance.values() {
        let solved: Vec<_> = runs.iter().filter(|r| r.verdict != "UNKNOWN").collect();
        if let Some(best) = solved.iter().min_by(|a, b| a.cpu_s.total_cmp(&b.cpu_s)) {
            let unique = solved.iter().filter(|r| r.cpu_s == best.cpu_s).count() == 1;
            if unique {
                *counts.entry(best.mode.clone()).or_insert(0) += 1;
            }
        }
    }
    counts
}

pub fn bench_command(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| -> Result<(), CliError> {
        let instances = read_manifest(&args.manifest)?;
        let report = run_bench(&instances, &args.modes, &args.search)?;
        match &args.out {
            Some(p) => write_csv(&report.records, File::create(p).map_err(io_err(p))?)?,
            None => write_csv(&report.records, &mut *out)?,
        }
        for f in &report.failures {
            let _ = writeln!(err, "error: {} [{}]: {}", f.instance, f.mode, f.note);
        }
        for (mode, n) in faster_counts(&report.records) {
            let _ = writeln!(err, "c faster {mode}: {n} instances");
        }
        Ok(())
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

// ---- replay ---------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub cnf: PathBuf,
    /// One DIMACS literal per line, one decision per level.
    pub decisions: PathBuf,
}

/// Decision literals with their 1-based script line numbers.
pub fn read_script(path: &Path) -> Result<Vec<(usize, Lit)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let v: i32 = line.parse().ok().filter(|&v| v != 0).ok_or_else(|| CliError::Script {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("expected a non-zero literal, found `{line}`"),
        })?;
        out.push((i + 1, Lit::from_dimacs(v)));
    }
    Ok(out)
}

fn join(lits: &[Lit]) -> String {
    lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

/// Makes the scripted decisions, propagating after each, and renders the
/// derivation of the first conflict.
pub fn replay(formula: &Formula, script: &[(usize, Lit)], script_path: &Path) -> Result<String, CliError> {
    let config = SolverConfig {
        record: true,
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(formula, config)?;
    let mut out = String::new();
    let mut conflict = solver.propagate();
    if solver.is_unsat() || (conflict.is_some() && solver.decision_level() == 0) {
        out.push_str("conflict at level 0\n");
        return Ok(out);
    }
    for &(line, lit) in script {
        if conflict.is_some() {
            break;
        }
        solver.decide_literal(lit).map_err(|e| CliError::Script {
            path: script_path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let _ = writeln!(out, "decide {lit} level {}", solver.decision_level());
        conflict = solver.propagate();
    }
    let Some(confl) = conflict else {
        out.push_str("no conflict\n");
        let _ = writeln!(out, "trail {}", join(solver.trail()));
        return Ok(out);
    };
    let _ = writeln!(out, "trail {}", join(solver.trail()));
    let result = solver.analyze(confl)?;
    let log = result.log.as_ref().expect("recording enabled");
    let _ = writeln!(
        out,
        "conflict {confl} level {} clause {}",
        solver.decision_level(),
        join(&canonical(&log.conflict_lits))
    );
    for (i, s) in log.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "step {} pivot {} reason {} resolvent {}",
            i + 1,
            s.pivot,
            s.reason,
            join(&s.resolvent)
        );
    }
    let _ = writeln!(out, "uip {}", result.uip);
    let _ = writeln!(out, "derived {}", join(&canonical(&result.derived_clause)));
    let _ = writeln!(out, "asserting {}", join(&canonical(&result.asserting_clause)));
    let _ = writeln!(out, "backjump {}", result.backjump_level);
    for r in &result.requests {
        let _ = writeln!(out, "subsumption step {} clause {} remove {}", r.step, r.clause, r.remove);
    }
    Ok(out)
}

pub fn replay_command(args: &ReplayArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = read_formula(&args.cnf)
        .and_then(|f| read_script(&args.decisions).map(|s| (f, s)))
        .and_then(|(f, s)| replay(&f, &s, &args.decisions));
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

// ---- gen / check ----------------------------------------------------------

#[derive(Debug, Clone, Subcommand)]
pub enum GenCommand {
    /// Pigeonhole principle: `pigeons` into `holes`.
    Php { pigeons: usize, holes: usize },
    /// Uniform random 3-CNF with `round(ratio * vars)` clauses.
    Random {
        vars: usize,
        #[arg(long, default_value_t = 4.26)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

pub fn gen_command(cmd: &GenCommand, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let formula = match *cmd {
        GenCommand::Php { pigeons, holes } => crate::gen::pigeonhole(pigeons, holes),
        GenCommand::Random { vars, ratio, seed } => {
            if vars < 3 || !(ratio >= 0.0 && ratio.is_finite()) {
                let _ = writeln!(err, "error: need at least 3 variables and a finite ratio");
                return EXIT_ERROR;
            }
            crate::gen::random_3sat(vars, ratio, seed)
        }
    };
    match formula.write_dimacs(&mut *out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    pub cnf: PathBuf,
    pub proof: PathBuf,
}

pub fn check_command(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| -> Result<String, CliError> {
        let formula = read_formula(&args.cnf)?;
        let text = std::fs::read_to_string(&args.proof).map_err(io_err(&args.proof))?;
        let events = parse_drat(&text).map_err(|e| CliError::Proof(e.to_string()))?;
        let clauses: Vec<Vec<i32>> = formula.clauses.iter().map(|c| crate::cnf::to_dimacs_vec(&c.lits)).collect();
        let mut clauses = clauses;
        if formula.trivially_unsat {
            clauses.push(Vec::new());
        }
        let summary = check_drat(formula.num_vars, &clauses, &events).map_err(|e| CliError::Proof(e.to_string()))?;
        Ok(format!(
            "s VERIFIED\nc lemmas {} rat {} deletions {}\n",
            summary.lemmas, summary.rat_lemmas, summary.deletions
        ))
    })();
    match result {
        Ok(s) => {
            let _ = out.write_all(s.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    let code = match &cli.command {
        Command::Solve(a) => solve_command(a, &mut out, &mut err),
        Command::Bench(a) => bench_command(a, &mut out, &mut err),
        Command::Replay(a) => replay_command(a, &mut out, &mut err),
        Command::Gen(g) => gen_command(g, &mut out, &mut err),
        Command::Check(a) => check_command(a, &mut out, &mut err),
    };
    let _ = out.flush();
    code
}
