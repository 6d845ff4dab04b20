use std::fs;
use std::io::{self, BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crown_verifier::instance::{figure1_instance, Instance};
use crown_verifier::lists::PartialColoring;
use crown_verifier::solver::{self, Budget, SolveError};
use crown_verifier::structure::{self, StructureError};
use crown_verifier::sweep::{self, LogTarget, Manifest, SweepConfig};
use crown_verifier::verifiers::{self, Checks, Outcome, StatementId, VerifyError};

/// Exit codes.
const HOLDS: u8 = 0;
const COUNTEREXAMPLE: u8 = 1;
const HYPOTHESIS_NOT_MET: u8 = 2;
const INPUT: u8 = 3;
const TIMEOUT: u8 = 4;

/// Name accepted by `--input` for the built-in Figure 1 instance.
const BUILTIN_FIGURE1: &str = "builtin:figure1";

#[derive(Parser)]
#[command(name = "crown-verifier", version, about = "Check list-coloring extension statements on small plane graphs")]
#[command(after_help = "Exit codes: 0 holds / ok, 1 counterexample, 2 hypothesis not met, 3 input error, 4 timeout.")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check one statement on one instance and print the verdict.
    Verify {
        #[arg(long)]
        stmt: String,
        /// Instance JSON file, `-` for stdin, or `builtin:figure1`.
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        timeout_ms: Option<u64>,
        /// Evaluate the conclusion even when the hypotheses fail.
        #[arg(long)]
        conclusion_only: bool,
    },
    /// Recheck a verdict (one JSON line) against its instance.
    Recheck {
        #[arg(long)]
        input: Option<String>,
        /// File holding the verdict line.
        #[arg(long)]
        verdict: PathBuf,
        #[arg(long)]
        conclusion_only: bool,
    },
    /// Check a statement over a generated family of instances.
    Sweep(SweepArgs),
    /// Recheck every verdict of a sweep log against regenerated instances.
    Replay {
        /// Verdict log written by `sweep`; its manifest is read from beside it.
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Extend a partial coloring to the whole graph.
    Solve {
        #[arg(long)]
        input: Option<String>,
        /// Partial coloring as a JSON object from vertex to color, e.g. {"0":1}.
        #[arg(long)]
        coloring: Option<String>,
        #[arg(long)]
        timeout_ms: Option<u64>,
    },
    /// Decide or list the Crown of the instance's path.
    Crown {
        #[arg(long)]
        input: Option<String>,
        #[arg(long, conflicts_with = "nonempty")]
        enumerate: bool,
        #[arg(long)]
        nonempty: bool,
        #[arg(long)]
        timeout_ms: Option<u64>,
    },
    /// Print the built-in Figure 1 instance as JSON.
    Figure1,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    stmt: String,
    #[arg(long)]
    max_vertices: usize,
    #[arg(long, default_value_t = 0)]
    min_vertices: usize,
    #[arg(long)]
    universe: usize,
    /// Sample instances from this seed instead of enumerating.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Stop after this many instances.
    #[arg(long)]
    limit: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Skip rechecking each certificate.
    #[arg(long)]
    no_recheck: bool,
    /// Verdict log path; manifest and summary are written beside it.
    #[arg(long)]
    out: PathBuf,
    /// Write only the manifest and summary; the summary keeps a digest of
    /// the log.
    #[arg(long)]
    summary_only: bool,
}

struct Failure {
    code: u8,
    msg: String,
}

fn input_error(msg: impl ToString) -> Failure {
    Failure { code: INPUT, msg: msg.to_string() }
}

fn timeout() -> Failure {
    Failure { code: TIMEOUT, msg: "timed out".into() }
}

fn load(input: Option<&str>) -> Result<Instance, Failure> {
    let text = match input {
        Some(BUILTIN_FIGURE1) => return Ok(figure1_instance()),
        None | Some("-") => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(input_error)?;
            s
        }
        Some(path) => fs::read_to_string(path).map_err(|e| input_error(format!("{path}: {e}")))?,
    };
    Instance::from_json(&text).map_err(input_error)
}

fn parse_stmt(s: &str) -> Result<StatementId, Failure> {
    s.parse().map_err(input_error)
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Holds => HOLDS,
        Outcome::Counterexample => COUNTEREXAMPLE,
        Outcome::HypothesisNotMet => HYPOTHESIS_NOT_MET,
    }
}

fn verify_error(e: VerifyError) -> Failure {
    match e {
        VerifyError::Timeout(_) => timeout(),
        other => input_error(other),
    }
}

fn checks(conclusion_only: bool) -> Checks {
    if conclusion_only {
        Checks::ConclusionOnly
    } else {
        Checks::Full
    }
}

fn print(v: &Value) {
    emit(&v.to_string());
}

/// Writes one line to stdout. A closed pipe ends the process quietly.
fn emit(line: &str) {
    let mut out = io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}").and_then(|_| out.flush()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(3);
    }
}

fn cmd_verify(stmt: &str, input: Option<&str>, timeout_ms: Option<u64>, conclusion_only: bool) -> Result<u8, Failure> {
    let stmt = parse_stmt(stmt)?;
    let inst = if stmt == StatementId::Figure1 && input.is_none() { figure1_instance() } else { load(input)? };
    let mut budget = Budget::from_millis(timeout_ms);
    let v = verifiers::verify_with(stmt, &inst, &mut budget, checks(conclusion_only)).map_err(verify_error)?;
    emit(&v.to_json_line());
    Ok(outcome_code(v.outcome))
}

fn cmd_recheck(input: Option<&str>, verdict: &Path, conclusion_only: bool) -> Result<u8, Failure> {
    let text = fs::read_to_string(verdict).map_err(|e| input_error(format!("{}: {e}", verdict.display())))?;
    let v: verifiers::Verdict = serde_json::from_str(text.trim()).map_err(input_error)?;
    let inst = if v.stmt == StatementId::Figure1 && input.is_none() { figure1_instance() } else { load(input)? };
    let ok = verifiers::recheck_with(&v, &inst, checks(conclusion_only)).map_err(input_error)?;
    print(&json!({ "stmt": v.stmt, "fingerprint": v.fingerprint, "recheck": ok }));
    Ok(if ok { HOLDS } else { COUNTEREXAMPLE })
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8, Failure> {
    let cfg = SweepConfig {
        stmt: parse_stmt(&a.stmt)?,
        max_vertices: a.max_vertices,
        min_vertices: a.min_vertices,
        universe: a.universe,
        seed: a.seed,
        samples: if a.seed.is_some() { a.samples } else { 0 },
        limit: a.limit,
        timeout_ms: a.timeout_ms,
        recheck: !a.no_recheck,
    };
    let out = match cached(&cfg, &a.out) {
        Some(out) => out,
        None if a.summary_only => sweep::run_into(&cfg, a.jobs, LogTarget::Discard).map_err(input_error)?,
        None => {
            let out = sweep::run_into(&cfg, a.jobs, LogTarget::File(&a.out)).map_err(input_error)?;
            store(&out, &a.out);
            out
        }
    };
    sweep::write_sidecars(&out, &a.out).map_err(input_error)?;
    let s = &out.summary;
    print(&serde_json::to_value(s).expect("summary serializes"));
    Ok(if s.counterexample > 0 || s.recheck_failures > 0 {
        COUNTEREXAMPLE
    } else if s.timeouts > 0 {
        TIMEOUT
    } else {
        HOLDS
    })
}

/// Optional memo directory keyed by the manifest digest.
fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("CROWN_VERIFIER_CACHE").map(PathBuf::from)
}

/// Copies a memoized log to `out` and returns its manifest and summary.
fn cached(cfg: &SweepConfig, out: &Path) -> Option<sweep::SweepOutput> {
    let manifest = Manifest::new(cfg.clone());
    let log = cache_dir()?.join(format!("{}.jsonl", manifest.digest()));
    let (mpath, spath) = sweep::sidecar_paths(&log);
    let stored: Manifest = serde_json::from_str(&fs::read_to_string(mpath).ok()?).ok()?;
    if stored != manifest {
        return None;
    }
    let summary = serde_json::from_str(&fs::read_to_string(spath).ok()?).ok()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).ok()?;
    }
    fs::copy(&log, out).ok()?;
    Some(sweep::SweepOutput { manifest, lines: Vec::new(), summary })
}

fn store(out: &sweep::SweepOutput, log: &Path) {
    let Some(dir) = cache_dir() else { return };
    let dest = dir.join(format!("{}.jsonl", out.manifest.digest()));
    let res = fs::create_dir_all(&dir)
        .and_then(|_| fs::copy(log, &dest))
        .map_err(sweep::SweepError::from)
        .and_then(|_| sweep::write_sidecars(out, &dest));
    if let Err(e) = res {
        eprintln!("warning: cache write failed: {e}");
    }
}

fn read_lines(path: &Path) -> io::Result<Vec<String>> {
    io::BufReader::new(fs::File::open(path)?).lines().filter(|l| !matches!(l, Ok(s) if s.is_empty())).collect()
}

fn cmd_replay(log: &Path, jobs: usize) -> Result<u8, Failure> {
    let (mpath, _) = sweep::sidecar_paths(log);
    let text = fs::read_to_string(&mpath).map_err(|e| input_error(format!("{}: {e}", mpath.display())))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(input_error)?;
    let lines = read_lines(log).map_err(|e| input_error(format!("{}: {e}", log.display())))?;
    let r = sweep::replay(&manifest, &lines, jobs).map_err(input_error)?;
    print(&serde_json::to_value(&r).expect("replay serializes"));
    Ok(if r.clean() { HOLDS } else { COUNTEREXAMPLE })
}

fn parse_coloring(inst: &Instance, s: Option<&str>) -> Result<PartialColoring, Failure> {
    let n = inst.emb.vertex_count();
    let Some(s) = s else { return Ok(PartialColoring::empty(n)) };
    let map: std::collections::BTreeMap<String, u64> = serde_json::from_str(s).map_err(input_error)?;
    let mut phi = PartialColoring::empty(n);
    for (k, c) in map {
        let v: usize = k.parse().map_err(|_| input_error(format!("bad vertex {k:?}")))?;
        if v >= n || c > u8::MAX as u64 {
            return Err(input_error(format!("vertex {v} or color {c} out of range")));
        }
        phi.set(v, c as u8);
    }
    Ok(phi)
}

fn cmd_solve(input: Option<&str>, coloring: Option<&str>, timeout_ms: Option<u64>) -> Result<u8, Failure> {
    let inst = load(input)?;
    let phi = parse_coloring(&inst, coloring)?;
    let mut budget = Budget::from_millis(timeout_ms);
    match solver::extend(&inst.emb, &inst.lists, &phi, &mut budget) {
        Ok(Some(c)) => print(&json!({ "status": "SAT", "coloring": c })),
        Ok(None) => print(&json!({ "status": "UNSAT" })),
        Err(SolveError::Timeout(_)) => return Err(timeout()),
        Err(e) => return Err(input_error(e)),
    }
    Ok(HOLDS)
}

fn structure_error(e: StructureError) -> Failure {
    match e {
        StructureError::Timeout(_) => timeout(),
        other => input_error(other),
    }
}

fn cmd_crown(input: Option<&str>, enumerate: bool, timeout_ms: Option<u64>) -> Result<u8, Failure> {
    let inst = load(input)?;
    let mut budget = Budget::from_millis(timeout_ms);
    if enumerate {
        let all = structure::crown_set(&inst.emb, &inst.lists, &inst.path, &mut budget).map_err(structure_error)?;
        let elements: Vec<_> = all.iter().map(PartialColoring::pairs).collect();
        let status = if elements.is_empty() { "EMPTY" } else { "NONEMPTY" };
        print(&json!({ "status": status, "count": elements.len(), "elements": elements }));
    } else {
        match structure::crown_nonempty(&inst.emb, &inst.lists, &inst.path, &mut budget).map_err(structure_error)? {
            Some(phi) => print(&json!({ "status": "NONEMPTY", "element": phi.pairs() })),
            None => print(&json!({ "status": "EMPTY" })),
        }
    }
    Ok(HOLDS)
}

fn main() -> ExitCode {
    // Usage errors share the input-error code rather than clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { HOLDS });
        }
    };
    let r = match &cli.cmd {
        Cmd::Verify { stmt, input, timeout_ms, conclusion_only } => {
            cmd_verify(stmt, input.as_deref(), *timeout_ms, *conclusion_only)
        }
        Cmd::Recheck { input, verdict, conclusion_only } => cmd_recheck(input.as_deref(), verdict, *conclusion_only),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Replay { log, jobs } => cmd_replay(log, *jobs),
        Cmd::Solve { input, coloring, timeout_ms } => cmd_solve(input.as_deref(), coloring.as_deref(), *timeout_ms),
        // --nonempty is the default mode.
        Cmd::Crown { input, enumerate, nonempty: _, timeout_ms } => {
            cmd_crown(input.as_deref(), *enumerate, *timeout_ms)
        }
        Cmd::Figure1 => {
            emit(&figure1_instance().to_json());
            Ok(HOLDS)
        }
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
