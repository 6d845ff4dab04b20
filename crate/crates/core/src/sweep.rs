//! Sweeps: one statement checked over a generated family of instances, with
//! verdicts aggregated in fingerprint order so that the log does not depend
//! on the number of workers.

use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::color::ColorSet;
use crate::embedding::{bit, broken_wheel, mask_of, outer_chords, PlanarEmbedding, Vertex};
use crate::generator::{
    enumerate_embeddings, for_each_list_assignment, inner_common_neighbor, sample_instance, EmbeddingOptions,
    GeneratorError, SampleParams, DEFAULT_VERTEX_CAP,
};
use crate::instance::{figure1_instance, Instance};
use crate::lists::{ListAssignment, PartialColoring};
use crate::solver::Budget;
use crate::verifiers::{recheck, verify, Outcome, StatementId, VerifyError};

pub const SWEEP_FORMAT: u32 = 1;

/// Instances handed to the worker pool at a time.
const BATCH: usize = 2048;

/// Number of slowest instances kept in the summary.
const SLOWEST: usize = 5;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Everything that determines the verdict log. The worker count is
/// deliberately absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub stmt: StatementId,
    pub max_vertices: usize,
    #[serde(default)]
    pub min_vertices: usize,
    pub universe: usize,
    /// Sampled mode when set; exhaustive otherwise.
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: u64,
    /// Stop after this many instances (in generation order).
    pub limit: Option<u64>,
    pub timeout_ms: Option<u64>,
    #[serde(default = "yes")]
    pub recheck: bool,
}

fn yes() -> bool {
    true
}

impl SweepConfig {
    pub fn new(stmt: StatementId, max_vertices: usize, universe: usize) -> Self {
        SweepConfig {
            stmt,
            max_vertices,
            min_vertices: 0,
            universe,
            seed: None,
            samples: 0,
            limit: None,
            timeout_ms: None,
            recheck: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub generator_version: String,
    pub config: SweepConfig,
    pub vertex_cap: usize,
    /// The list sizes given to each vertex role.
    pub envelope: String,
}

impl Manifest {
    pub fn new(config: SweepConfig) -> Self {
        Manifest {
            format: SWEEP_FORMAT,
            generator_version: env!("CARGO_PKG_VERSION").to_string(),
            envelope: envelope(config.stmt).describe(),
            vertex_cap: DEFAULT_VERTEX_CAP,
            config,
        }
    }

    /// Content hash of the manifest, used as a cache key.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("manifest serializes")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub stmt: String,
    pub instances: u64,
    pub holds: u64,
    pub hypothesis_not_met: u64,
    pub counterexample: u64,
    pub timeouts: u64,
    pub errors: u64,
    pub rechecked: u64,
    pub recheck_failures: u64,
    /// False when `limit` cut the run short.
    pub complete: bool,
    /// Order-independent digest of the verdict lines; see [`log_digest`].
    pub log_digest: String,
    pub wall_ms: u64,
    pub slowest: Vec<(String, u64)>,
    pub counterexamples: Vec<String>,
    pub recheck_failed: Vec<String>,
    pub timed_out: Vec<String>,
    pub failed: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub manifest: Manifest,
    /// Verdict lines sorted by fingerprint, with `ms` zeroed.
    pub lines: Vec<String>,
    pub summary: Summary,
}

// ---------------------------------------------------------------------------
// List-size envelopes
// ---------------------------------------------------------------------------

/// List sizes per vertex role. Each is the least size the statement's
/// hypotheses allow, or a size that is without loss of generality (a vertex
/// that is always precolored only matters through its color).
#[derive(Debug, Clone, Copy)]
struct Envelope {
    /// Number of path vertices.
    path_len: usize,
    /// Whether the statement is unchanged by reversing the path.
    symmetric: bool,
    ends: &'static [(usize, usize)],
    /// Options for each internal path vertex.
    inner: &'static [usize],
    /// Internal path position with a fixed larger size.
    special: Option<(usize, usize)>,
    off_path: usize,
    /// Options for the outer neighbors of the path ends off the path.
    beside_ends: Option<&'static [usize]>,
    interior: usize,
}

const LINKED: &[(usize, usize)] = &[(1, 3), (2, 2), (3, 1)];

fn envelope(stmt: StatementId) -> Envelope {
    let base = Envelope {
        path_len: 3,
        symmetric: false,
        ends: LINKED,
        inner: &[3],
        special: None,
        off_path: 3,
        beside_ends: None,
        interior: 5,
    };
    match stmt {
        StatementId::Holepunch => Envelope { path_len: 5, symmetric: true, inner: &[5], ..base },
        StatementId::Figure1 => base,
        StatementId::Thomassen => Envelope { path_len: 2, ends: &[(1, 1)], inner: &[], ..base },
        StatementId::Cor22 | StatementId::Obstruction => {
            Envelope { path_len: 2, ends: &[(1, 1)], inner: &[], off_path: 1, ..base }
        }
        StatementId::Cor23 => Envelope { path_len: 2, ends: &[(1, 1)], inner: &[], beside_ends: Some(&[2, 3]), ..base },
        StatementId::BrokenWheel => Envelope { ends: &[(3, 3)], ..base },
        StatementId::Lem44 => Envelope { ends: &[(1, 1)], ..base },
        StatementId::Thm45 | StatementId::Cor46 => Envelope { ends: &[(3, 3), (1, 3)], ..base },
        StatementId::Thm48 => Envelope { symmetric: true, inner: &[1, 2, 3], ..base },
        StatementId::Cor49 => base,
        StatementId::Thm410 => Envelope { path_len: 4, ..base },
        StatementId::Thm411 => Envelope { path_len: 4, ends: &[(1, 3)], ..base },
        StatementId::Thm51 => Envelope { path_len: 4, special: Some((2, 5)), ..base },
        StatementId::Lem52 => Envelope { path_len: 5, symmetric: true, special: Some((2, 5)), ..base },
    }
}

impl Envelope {
    fn describe(&self) -> String {
        format!(
            "path {} vertices{}; ends {:?}; inner {:?}{}; off-path {}{}; interior {}",
            self.path_len,
            if self.symmetric { " (up to reversal)" } else { "" },
            self.ends,
            self.inner,
            self.special.map(|(i, s)| format!(", position {i} size {s}")).unwrap_or_default(),
            self.off_path,
            self.beside_ends.map(|b| format!(", beside ends {b:?}")).unwrap_or_default(),
            self.interior,
        )
    }

    /// Every per-vertex size vector for `emb` with `path`.
    fn size_vectors(&self, emb: &PlanarEmbedding, path: &[Vertex]) -> Vec<Vec<usize>> {
        let n = emb.vertex_count();
        let outer = emb.outer_mask();
        let mut base: Vec<usize> =
            (0..n).map(|v| if outer & bit(v) != 0 { self.off_path } else { self.interior }).collect();
        let mut free: Vec<(Vertex, &'static [usize])> = Vec::new();
        let last = path.len() - 1;
        for (i, &v) in path.iter().enumerate().take(last).skip(1) {
            match self.special {
                Some((j, s)) if j == i => base[v] = s,
                _ => free.push((v, self.inner)),
            }
        }
        if let Some(opts) = self.beside_ends {
            let c = emb.outer_cycle();
            let k = c.len();
            let pmask = mask_of(path);
            let mut beside: Vec<Vertex> = [path[0], path[last]]
                .iter()
                .flat_map(|&p| {
                    let i = emb.outer_position(p).unwrap();
                    [c[(i + 1) % k], c[(i + k - 1) % k]]
                })
                .filter(|&u| pmask & bit(u) == 0)
                .collect();
            beside.sort_unstable();
            beside.dedup();
            free.extend(beside.into_iter().map(|u| (u, opts)));
        }
        let mut out = Vec::new();
        for &(a, b) in self.ends {
            let mut sizes = base.clone();
            sizes[path[0]] = a;
            sizes[path[last]] = b;
            product(&free, 0, &mut sizes, &mut out);
        }
        out
    }
}

fn product(free: &[(Vertex, &[usize])], i: usize, sizes: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i == free.len() {
        out.push(sizes.clone());
        return;
    }
    let (v, opts) = free[i];
    for &s in opts {
        sizes[v] = s;
        product(free, i + 1, sizes, out);
    }
}

// ---------------------------------------------------------------------------
// Instance families
// ---------------------------------------------------------------------------

fn embedding_options(stmt: StatementId, min_vertices: usize) -> EmbeddingOptions {
    let path_len = envelope(stmt).path_len;
    let mut opts =
        EmbeddingOptions { min_vertices, outer_lengths: Some((path_len.max(3), usize::MAX)), ..Default::default() };
    match stmt {
        StatementId::Cor22 => opts.outer_lengths = Some((3, 4)),
        StatementId::Obstruction => {
            opts.outer_lengths = Some((5, 6));
            opts.require_ssf = true;
        }
        StatementId::Thm45 | StatementId::Cor46 => opts.require_ssf = true,
        StatementId::Lem52 => {
            opts.require_ssf = true;
            opts.triangulated_interior = true;
        }
        _ => {}
    }
    opts
}

/// Paths of `len` vertices along the outer cycle, one per orbit under the
/// symmetries of the embedding.
fn placements(emb: &PlanarEmbedding, len: usize, symmetric: bool) -> Vec<Vec<Vertex>> {
    let c = emb.outer_cycle();
    let k = c.len();
    if len > k {
        return Vec::new();
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for start in 0..k {
        for step in [1, k - 1] {
            let path: Vec<Vertex> = (0..len).map(|i| c[(start + i * step) % k]).collect();
            if seen.insert(emb.rooted_code(&path, symmetric)) {
                out.push(path);
            }
        }
    }
    out
}

/// Placement conditions that do not involve the lists; placements failing
/// them would only produce hypothesis-not-met verdicts.
fn placement_ok(stmt: StatementId, emb: &PlanarEmbedding, path: &[Vertex]) -> bool {
    let chord_at = |v: Vertex| outer_chords(emb).iter().any(|&(a, b)| a == v || b == v);
    match stmt {
        StatementId::Holepunch => inner_common_neighbor(emb, path).is_none(),
        StatementId::Thm45 | StatementId::Cor46 => outer_chords(emb).iter().all(|&(a, b)| a == path[1] || b == path[1]),
        StatementId::Thm411 => emb.adjacency_mask(path[2]) & emb.outer_mask() == bit(path[1]) | bit(path[3]),
        StatementId::Lem52 => !chord_at(path[2]),
        _ => true,
    }
}

/// Fills in the objects a statement quantifies over beyond the rainbow.
fn decorate(stmt: StatementId, inst: Instance, out: &mut dyn FnMut(Instance)) {
    if stmt != StatementId::Cor49 {
        out(inst);
        return;
    }
    // Every admissible x, with the family of all one-vertex colorings of x.
    let emb = &inst.emb;
    let (p, q, p2) = (inst.path[0], inst.path[1], *inst.path.last().unwrap());
    let pmask = mask_of(&inst.path);
    let n = emb.vertex_count();
    let mut xs: Vec<Vertex> = (0..n)
        .filter(|&x| x == p || (emb.outer_mask() & bit(x) != 0 && pmask & bit(x) == 0))
        .filter(|&x| x != p2 && emb.has_edge(q, x))
        .collect();
    xs.sort_unstable();
    for x in xs {
        let mut i = inst.clone();
        i.x = Some(x);
        i.family = Some(inst.lists.get(x).iter().map(|c| PartialColoring::from_pairs(n, &[(x, c)])).collect());
        out(i);
    }
}

/// Calls `f` on every instance of the sweep in generation order.
fn produce(cfg: &SweepConfig, f: &mut dyn FnMut(Instance)) -> Result<(), SweepError> {
    let stmt = cfg.stmt;
    if stmt == StatementId::Figure1 {
        f(figure1_instance());
        return Ok(());
    }
    if let Some(seed) = cfg.seed {
        return sample(cfg, seed, f);
    }
    let env = envelope(stmt);
    let embeddings: Vec<PlanarEmbedding> = if stmt == StatementId::BrokenWheel {
        if cfg.max_vertices > DEFAULT_VERTEX_CAP {
            return Err(GeneratorError::CapExceeded { got: cfg.max_vertices, cap: DEFAULT_VERTEX_CAP }.into());
        }
        (cfg.min_vertices.max(3)..=cfg.max_vertices).map(|n| broken_wheel(n - 1)).collect()
    } else {
        enumerate_embeddings(cfg.max_vertices, embedding_options(stmt, cfg.min_vertices))?
    };
    for emb in embeddings {
        let paths = match stmt {
            StatementId::BrokenWheel => {
                let rim = emb.vertex_count() - 1;
                vec![vec![0, rim, rim - 1]]
            }
            // The path only names two outer vertices here.
            StatementId::Cor22 | StatementId::Obstruction => vec![emb.outer_cycle()[..2].to_vec()],
            _ => placements(&emb, env.path_len, env.symmetric),
        };
        for path in paths {
            if !placement_ok(stmt, &emb, &path) {
                continue;
            }
            for sizes in env.size_vectors(&emb, &path) {
                let mut err = None;
                for_each_list_assignment(&sizes, cfg.universe, |lists| {
                    let inst = Instance::new(emb.clone(), ListAssignment::new(lists.to_vec()), path.clone());
                    decorate(stmt, inst, f);
                })
                .unwrap_or_else(|e| err = Some(e));
                if let Some(e) = err {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn sample(cfg: &SweepConfig, seed: u64, f: &mut dyn FnMut(Instance)) -> Result<(), SweepError> {
    let stmt = cfg.stmt;
    let env = envelope(stmt);
    if stmt == StatementId::BrokenWheel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rim = cfg.max_vertices.saturating_sub(1).max(2);
        let colors: Vec<u8> = (0..cfg.universe as u8).collect();
        for _ in 0..cfg.samples {
            let lists = (0..=rim)
                .map(|_| {
                    let mut c = colors.clone();
                    c.shuffle(&mut rng);
                    c[..3.min(c.len())].iter().copied().collect::<ColorSet>()
                })
                .collect();
            f(Instance::new(broken_wheel(rim), ListAssignment::new(lists), vec![0, rim, rim - 1]));
        }
        return Ok(());
    }
    let opts = embedding_options(stmt, 0);
    for i in 0..cfg.samples {
        let (a, b) = env.ends[(i % env.ends.len() as u64) as usize];
        let params = SampleParams {
            vertices: cfg.max_vertices,
            universe: cfg.universe,
            path_edges: env.path_len - 1,
            triangulated_interior: opts.triangulated_interior,
            no_common_neighbor: stmt == StatementId::Holepunch,
            endpoint_sizes: (a, b),
            path_inner_size: env.inner.iter().copied().max().unwrap_or(0).max(env.special.map_or(0, |s| s.1)),
            outer_size: env.off_path,
            interior_size: env.interior,
        };
        decorate(stmt, sample_instance(seed.wrapping_add(i), &params)?, f);
    }
    Ok(())
}

/// Number of instances a sweep would check, without checking them.
pub fn count_instances(cfg: &SweepConfig) -> Result<u64, SweepError> {
    let mut k = 0u64;
    produce(cfg, &mut |_| k += 1)?;
    Ok(k)
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

enum Checked {
    Verdict { fp: String, line: String, outcome: Outcome, ms: u64, recheck: Option<bool> },
    Timeout { fp: String },
    Error { fp: String, msg: String },
}

fn check(cfg: &SweepConfig, inst: &Instance) -> Checked {
    let start = Instant::now();
    let mut budget = Budget::from_millis(cfg.timeout_ms);
    match verify(cfg.stmt, inst, &mut budget) {
        Ok(mut v) => {
            let ms = start.elapsed().as_millis() as u64;
            let recheck = cfg.recheck.then(|| recheck(&v, inst).unwrap_or(false));
            v.ms = 0;
            Checked::Verdict { line: v.to_json_line(), fp: v.fingerprint, outcome: v.outcome, ms, recheck }
        }
        Err(VerifyError::Timeout(_)) => Checked::Timeout { fp: inst.fingerprint() },
        Err(e) => Checked::Error { fp: inst.fingerprint(), msg: e.to_string() },
    }
}

/// Where the sorted verdict lines of a run go.
#[derive(Debug, Clone, Copy)]
pub enum LogTarget<'a> {
    /// Kept in `SweepOutput::lines`.
    Memory,
    /// Written to a file, spilling sorted runs to disk when the log is large.
    File(&'a Path),
    /// Only counted and digested.
    Discard,
}

/// Lines held in memory before a sorted run is spilled.
const SPILL: usize = 1 << 19;

struct Collector {
    rows: Vec<(String, String)>,
    runs: Vec<PathBuf>,
    spill_dir: Option<PathBuf>,
    spill_at: usize,
    keep: bool,
    digest: LogDigest,
    summary: Summary,
}

impl Collector {
    fn absorb(&mut self, results: Vec<Checked>) -> io::Result<()> {
        let s = &mut self.summary;
        for r in results {
            s.instances += 1;
            match r {
                Checked::Verdict { fp, line, outcome, ms, recheck } => {
                    match outcome {
                        Outcome::Holds => s.holds += 1,
                        Outcome::HypothesisNotMet => s.hypothesis_not_met += 1,
                        Outcome::Counterexample => {
                            s.counterexample += 1;
                            s.counterexamples.push(fp.clone());
                        }
                    }
                    if let Some(ok) = recheck {
                        s.rechecked += 1;
                        if !ok {
                            s.recheck_failures += 1;
                            s.recheck_failed.push(fp.clone());
                        }
                    }
                    if s.slowest.len() < SLOWEST || s.slowest.last().is_some_and(|l| ms >= l.1) {
                        s.slowest.push((fp.clone(), ms));
                    }
                    self.digest.add(&line);
                    if self.keep {
                        self.rows.push((fp, line));
                    }
                }
                Checked::Timeout { fp } => {
                    s.timeouts += 1;
                    s.timed_out.push(fp);
                }
                Checked::Error { fp, msg } => {
                    s.errors += 1;
                    s.failed.push((fp, msg));
                }
            }
        }
        s.slowest.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        s.slowest.truncate(SLOWEST);
        if let Some(dir) = &self.spill_dir {
            if self.rows.len() >= self.spill_at {
                self.rows.sort_unstable();
                let path = dir.join(format!("run{}.jsonl", self.runs.len()));
                let mut w = io::BufWriter::new(fs::File::create(&path)?);
                for (_, line) in self.rows.drain(..) {
                    writeln!(w, "{line}")?;
                }
                w.flush()?;
                self.runs.push(path);
            }
        }
        Ok(())
    }

    /// Merges the spilled runs and the rows still in memory into `out`.
    fn merge_into(&mut self, out: &Path) -> io::Result<()> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        use std::io::BufRead;

        self.rows.sort_unstable();
        let mut w = io::BufWriter::new(fs::File::create(out)?);
        let mut sources: Vec<Box<dyn Iterator<Item = io::Result<String>>>> = Vec::new();
        for path in &self.runs {
            sources.push(Box::new(io::BufReader::new(fs::File::open(path)?).lines()));
        }
        sources.push(Box::new(std::mem::take(&mut self.rows).into_iter().map(|(_, l)| Ok(l))));
        // Lines of one sweep share their prefix up to the fixed-width
        // fingerprint, so line order is fingerprint order.
        let mut heap = BinaryHeap::new();
        for (i, src) in sources.iter_mut().enumerate() {
            if let Some(line) = src.next() {
                heap.push(Reverse((line?, i)));
            }
        }
        while let Some(Reverse((line, i))) = heap.pop() {
            writeln!(w, "{line}")?;
            if let Some(next) = sources[i].next() {
                heap.push(Reverse((next?, i)));
            }
        }
        w.flush()?;
        for path in self.runs.drain(..) {
            fs::remove_file(path)?;
        }
        Ok(())
    }
}

/// An order-independent digest of a multiset of verdict lines: the sum of
/// their SHA-256 hashes modulo 2^256.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct LogDigest([u64; 4]);

impl LogDigest {
    fn add(&mut self, line: &str) {
        let h = Sha256::digest(line.as_bytes());
        let mut carry = 0u128;
        for (i, limb) in self.0.iter_mut().enumerate() {
            let word = u64::from_le_bytes(h[i * 8..i * 8 + 8].try_into().unwrap());
            let sum = *limb as u128 + word as u128 + carry;
            *limb = sum as u64;
            carry = sum >> 64;
        }
    }

    fn hex(&self) -> String {
        self.0.iter().rev().map(|l| format!("{l:016x}")).collect()
    }
}

/// Digest of a verdict log as stored in `Summary::log_digest`.
pub fn log_digest<S: AsRef<str>>(lines: &[S]) -> String {
    let mut d = LogDigest::default();
    for l in lines {
        d.add(l.as_ref());
    }
    d.hex()
}

/// Runs the sweep on `jobs` worker threads, keeping the log in memory.
pub fn run(cfg: &SweepConfig, jobs: usize) -> Result<SweepOutput, SweepError> {
    run_into(cfg, jobs, LogTarget::Memory)
}

/// Runs the sweep on `jobs` worker threads, sending the log to `target`.
pub fn run_into(cfg: &SweepConfig, jobs: usize, target: LogTarget) -> Result<SweepOutput, SweepError> {
    execute(cfg, jobs, target, SPILL)
}

fn execute(cfg: &SweepConfig, jobs: usize, target: LogTarget, spill_at: usize) -> Result<SweepOutput, SweepError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let spill = match target {
        LogTarget::File(log) => {
            let dir = log.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            fs::create_dir_all(dir)?;
            Some(tempfile::Builder::new().prefix(".sweep-").tempdir_in(dir)?)
        }
        _ => None,
    };
    let mut col = Collector {
        rows: Vec::new(),
        runs: Vec::new(),
        spill_dir: spill.as_ref().map(|d| d.path().to_path_buf()),
        spill_at,
        keep: !matches!(target, LogTarget::Discard),
        digest: LogDigest::default(),
        summary: Summary { stmt: cfg.stmt.to_string(), ..Default::default() },
    };
    let mut batch: Vec<Instance> = Vec::with_capacity(BATCH);
    let mut taken = 0u64;
    let mut complete = true;
    let mut failure: Option<io::Error> = None;
    let mut flush = |batch: &mut Vec<Instance>, col: &mut Collector| {
        let results = pool.install(|| batch.par_iter().map(|i| check(cfg, i)).collect());
        if let Err(e) = col.absorb(results) {
            failure.get_or_insert(e);
        }
        batch.clear();
    };
    produce(cfg, &mut |inst| {
        if cfg.limit.is_some_and(|l| taken >= l) {
            complete = false;
            return;
        }
        taken += 1;
        batch.push(inst);
        if batch.len() == BATCH {
            flush(&mut batch, &mut col);
        }
    })?;
    flush(&mut batch, &mut col);
    if let Some(e) = failure {
        return Err(e.into());
    }
    let lines = match target {
        LogTarget::File(log) => {
            col.merge_into(log)?;
            Vec::new()
        }
        _ => {
            col.rows.sort_unstable();
            std::mem::take(&mut col.rows).into_iter().map(|(_, l)| l).collect()
        }
    };
    let mut summary = col.summary;
    summary.complete = complete;
    summary.log_digest = col.digest.hex();
    summary.wall_ms = start.elapsed().as_millis() as u64;
    for list in [&mut summary.counterexamples, &mut summary.recheck_failed, &mut summary.timed_out] {
        list.sort();
    }
    summary.failed.sort();
    Ok(SweepOutput { manifest: Manifest::new(cfg.clone()), lines, summary })
}

/// Paths of the manifest and summary written beside a verdict log.
pub fn sidecar_paths(log: &Path) -> (PathBuf, PathBuf) {
    let stem = log.with_extension("");
    let name = |suffix: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    (name(".manifest.json"), name(".summary.json"))
}

/// Writes the verdict log to `log` and its manifest and summary beside it.
pub fn write(out: &SweepOutput, log: &Path) -> Result<(), SweepError> {
    if let Some(dir) = log.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = io::BufWriter::new(fs::File::create(log)?);
    for line in &out.lines {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    write_sidecars(out, log)
}

/// Writes only the manifest and summary beside `log`.
pub fn write_sidecars(out: &SweepOutput, log: &Path) -> Result<(), SweepError> {
    let (manifest, summary) = sidecar_paths(log);
    fs::write(manifest, serde_json::to_string_pretty(&out.manifest).expect("manifest serializes") + "\n")?;
    fs::write(summary, serde_json::to_string_pretty(&out.summary).expect("summary serializes") + "\n")?;
    Ok(())
}

/// Result of replaying a verdict log through `recheck`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replay {
    pub lines: u64,
    pub rechecked: u64,
    pub passed: u64,
    /// Fingerprints whose certificate did not recheck.
    pub discrepancies: Vec<String>,
    /// Lines that did not parse or name no regenerated instance.
    pub unmatched: Vec<String>,
}

impl Replay {
    pub fn clean(&self) -> bool {
        self.discrepancies.is_empty() && self.unmatched.is_empty() && self.passed == self.lines
    }
}

/// Regenerates the instances named by `manifest` and rechecks every verdict
/// in `lines` against its instance.
pub fn replay(manifest: &Manifest, lines: &[String], jobs: usize) -> Result<Replay, SweepError> {
    use std::collections::HashMap;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let mut report = Replay { lines: lines.len() as u64, ..Default::default() };
    let mut pending: HashMap<String, crate::verifiers::Verdict> = HashMap::new();
    for line in lines {
        match serde_json::from_str::<crate::verifiers::Verdict>(line) {
            Ok(v) => {
                pending.insert(v.fingerprint.clone(), v);
            }
            Err(_) => report.unmatched.push(line.clone()),
        }
    }
    let mut batch: Vec<(crate::verifiers::Verdict, Instance)> = Vec::new();
    let flush = |batch: &mut Vec<(crate::verifiers::Verdict, Instance)>, report: &mut Replay| {
        let results: Vec<(String, bool)> = pool.install(|| {
            batch.par_iter().map(|(v, i)| (v.fingerprint.clone(), recheck(v, i).unwrap_or(false))).collect()
        });
        for (fp, ok) in results {
            report.rechecked += 1;
            if ok {
                report.passed += 1;
            } else {
                report.discrepancies.push(fp);
            }
        }
        batch.clear();
    };
    let mut taken = 0u64;
    let cfg = &manifest.config;
    produce(cfg, &mut |inst| {
        if cfg.limit.is_some_and(|l| taken >= l) || pending.is_empty() {
            return;
        }
        taken += 1;
        let fp = if cfg.stmt == StatementId::Figure1 { figure1_instance().fingerprint() } else { inst.fingerprint() };
        if let Some(v) = pending.remove(&fp) {
            batch.push((v, inst));
            if batch.len() == BATCH {
                flush(&mut batch, &mut report);
            }
        }
    })?;
    flush(&mut batch, &mut report);
    report.unmatched.extend(pending.into_keys());
    report.unmatched.sort();
    report.discrepancies.sort();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jobs_do_not_change_the_log() {
        let cfg = SweepConfig::new(StatementId::Thm48, 5, 5);
        let a = run(&cfg, 1).unwrap();
        let b = run(&cfg, 3).unwrap();
        assert!(a.summary.instances > 0);
        assert_eq!(a.lines, b.lines);
        assert_eq!(a.manifest, b.manifest);
    }

    #[test]
    fn placements_of_a_square() {
        let emb = crate::embedding::cycle_graph(4);
        // All 2-paths of a 4-cycle are equivalent, in both directions.
        assert_eq!(placements(&emb, 3, false).len(), 1);
        assert_eq!(placements(&emb, 5, false).len(), 0);
    }

    #[test]
    fn sizes_follow_the_roles() {
        let emb = crate::embedding::wheel(5);
        let env = envelope(StatementId::Holepunch);
        let v = env.size_vectors(&emb, &[0, 1, 2, 3, 4]);
        assert_eq!(v, vec![vec![1, 5, 5, 5, 3, 5], vec![2, 5, 5, 5, 2, 5], vec![3, 5, 5, 5, 1, 5]]);
        let env = envelope(StatementId::Cor23);
        let v = env.size_vectors(&crate::embedding::cycle_graph(4), &[0, 1]);
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|s| s[0] == 1 && s[1] == 1));
    }

    #[test]
    fn limit_marks_the_run_incomplete() {
        let mut cfg = SweepConfig::new(StatementId::Thomassen, 5, 5);
        cfg.limit = Some(3);
        let out = run(&cfg, 1).unwrap();
        assert_eq!(out.summary.instances, 3);
        assert!(!out.summary.complete);
    }

    #[test]
    fn glue_instances_carry_their_inputs() {
        let cfg = SweepConfig::new(StatementId::Cor49, 5, 5);
        let out = run(&cfg, 1).unwrap();
        assert!(out.summary.holds > 0);
        assert_eq!(out.summary.errors, 0, "{:?}", out.summary.failed);
        assert_eq!(out.summary.counterexample, 0);
    }

    #[test]
    fn replay_accepts_its_own_log_and_rejects_edits() {
        let cfg = SweepConfig::new(StatementId::Cor22, 5, 5);
        let out = run(&cfg, 2).unwrap();
        let r = replay(&out.manifest, &out.lines, 2).unwrap();
        assert!(r.clean(), "{r:?}");
        let mut lines = out.lines.clone();
        let i = lines.iter().position(|l| l.contains("\"extension\":[0,")).unwrap();
        lines[i] = lines[i].replacen("\"extension\":[0,", "\"extension\":[9,", 1);
        let r = replay(&out.manifest, &lines, 1).unwrap();
        assert_eq!(r.discrepancies.len(), 1);
    }

    #[test]
    fn file_and_discard_targets_agree_with_memory() {
        let cfg = SweepConfig::new(StatementId::Thomassen, 5, 5);
        let mem = run(&cfg, 1).unwrap();
        assert_eq!(mem.summary.log_digest, log_digest(&mem.lines));
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("t.jsonl");
        let file = execute(&cfg, 2, LogTarget::File(&log), 1000).unwrap();
        let text = fs::read_to_string(&log).unwrap();
        assert_eq!(text.lines().collect::<Vec<_>>(), mem.lines);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1, "spilled runs are removed");
        let gone = run_into(&cfg, 1, LogTarget::Discard).unwrap();
        assert!(gone.lines.is_empty());
        assert_eq!(gone.summary.log_digest, mem.summary.log_digest);
        assert_eq!(file.summary.log_digest, mem.summary.log_digest);
    }

    #[test]
    fn sampled_mode_is_reproducible() {
        let mut cfg = SweepConfig::new(StatementId::Thm410, 7, 5);
        cfg.seed = Some(42);
        cfg.samples = 5;
        let a = run(&cfg, 1).unwrap();
        let b = run(&cfg, 2).unwrap();
        assert_eq!(a.summary.instances, 5);
        assert_eq!(a.lines, b.lines);
    }
}
