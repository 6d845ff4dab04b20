//! Registry of checkable statements. Each statement has a hypothesis
//! predicate, a conclusion check that produces a witness, and an independent
//! recheck of that witness built on the plain backtracking oracle.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::color::Color;
use crate::embedding::{bit, mask_of, PlanarEmbedding, Vertex};
use crate::instance::Instance;
use crate::lists::{ListAssignment, ListError, PartialColoring};
use crate::solver::{Budget, SolveError, Timeout};
use crate::structure::StructureError;

mod background;
mod crown;
mod ends;
mod engine;
mod wheels;

use engine::{Eng, Route};

pub use background::{classify_obstruction, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatementId {
    #[serde(rename = "THM_1_2_HOLEPUNCH")]
    Holepunch,
    #[serde(rename = "FIG_1_COUNTEREX")]
    Figure1,
    #[serde(rename = "THM_2_1_THOMASSEN")]
    Thomassen,
    #[serde(rename = "COR_2_2")]
    Cor22,
    #[serde(rename = "COR_2_3")]
    Cor23,
    #[serde(rename = "THM_2_5_OBSTRUCT")]
    Obstruction,
    #[serde(rename = "THM_4_3_BWHEEL")]
    BrokenWheel,
    #[serde(rename = "LEM_4_4")]
    Lem44,
    #[serde(rename = "THM_4_5")]
    Thm45,
    #[serde(rename = "COR_4_6")]
    Cor46,
    #[serde(rename = "THM_4_8")]
    Thm48,
    #[serde(rename = "COR_4_9")]
    Cor49,
    #[serde(rename = "THM_4_10")]
    Thm410,
    #[serde(rename = "THM_4_11")]
    Thm411,
    #[serde(rename = "THM_5_1")]
    Thm51,
    #[serde(rename = "LEM_5_2")]
    Lem52,
}

impl StatementId {
    pub const ALL: [StatementId; 16] = [
        StatementId::Holepunch,
        StatementId::Figure1,
        StatementId::Thomassen,
        StatementId::Cor22,
        StatementId::Cor23,
        StatementId::Obstruction,
        StatementId::BrokenWheel,
        StatementId::Lem44,
        StatementId::Thm45,
        StatementId::Cor46,
        StatementId::Thm48,
        StatementId::Cor49,
        StatementId::Thm410,
        StatementId::Thm411,
        StatementId::Thm51,
        StatementId::Lem52,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatementId::Holepunch => "THM_1_2_HOLEPUNCH",
            StatementId::Figure1 => "FIG_1_COUNTEREX",
            StatementId::Thomassen => "THM_2_1_THOMASSEN",
            StatementId::Cor22 => "COR_2_2",
            StatementId::Cor23 => "COR_2_3",
            StatementId::Obstruction => "THM_2_5_OBSTRUCT",
            StatementId::BrokenWheel => "THM_4_3_BWHEEL",
            StatementId::Lem44 => "LEM_4_4",
            StatementId::Thm45 => "THM_4_5",
            StatementId::Cor46 => "COR_4_6",
            StatementId::Thm48 => "THM_4_8",
            StatementId::Cor49 => "COR_4_9",
            StatementId::Thm410 => "THM_4_10",
            StatementId::Thm411 => "THM_4_11",
            StatementId::Thm51 => "THM_5_1",
            StatementId::Lem52 => "LEM_5_2",
        }
    }
}

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatementId {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, VerifyError> {
        StatementId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| VerifyError::UnknownStatement(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "hypothesis-not-met")]
    HypothesisNotMet,
    #[serde(rename = "counterexample")]
    Counterexample,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::HypothesisNotMet => "hypothesis-not-met",
            Outcome::Counterexample => "counterexample",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub stmt: StatementId,
    pub fingerprint: String,
    pub outcome: Outcome,
    pub witness: Value,
    pub ms: u64,
}

impl Verdict {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown statement id {0:?}")]
    UnknownStatement(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Timeout(#[from] Timeout),
}

impl From<SolveError> for VerifyError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Timeout(t) => VerifyError::Timeout(t),
            SolveError::Lists(l) => VerifyError::Input(l.to_string()),
        }
    }
}

impl From<StructureError> for VerifyError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::Timeout(t) => VerifyError::Timeout(t),
            other => VerifyError::Input(other.to_string()),
        }
    }
}

impl From<ListError> for VerifyError {
    fn from(e: ListError) -> Self {
        VerifyError::Input(e.to_string())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecheckError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

/// Result of a conclusion check before timing and fingerprinting.
pub(crate) struct Finding {
    pub outcome: Outcome,
    pub witness: Value,
}

impl Finding {
    pub fn holds(w: impl Serialize) -> Self {
        Finding { outcome: Outcome::Holds, witness: serde_json::to_value(w).expect("witness serializes") }
    }

    pub fn fails(w: impl Serialize) -> Self {
        Finding { outcome: Outcome::Counterexample, witness: serde_json::to_value(w).expect("witness serializes") }
    }

    pub fn unmet(reason: impl Into<String>) -> Self {
        Finding { outcome: Outcome::HypothesisNotMet, witness: serde_json::json!({ "unmet": reason.into() }) }
    }
}

/// Hypothesis check: `Err(reason)` when the statement does not apply.
pub(crate) type Hyp = Result<(), String>;

pub(crate) fn parse<T: for<'de> Deserialize<'de>>(w: &Value) -> Result<T, RecheckError> {
    serde_json::from_value(w.clone()).map_err(|e| RecheckError::Malformed(e.to_string()))
}

/// Evaluates `stmt` on `inst`. The budget covers the whole evaluation.
pub fn verify(stmt: StatementId, inst: &Instance, budget: &mut Budget) -> Result<Verdict, VerifyError> {
    verify_with(stmt, inst, budget, Checks::Full)
}

/// Whether hypotheses are checked before the conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Checks {
    #[default]
    Full,
    /// Evaluate the conclusion even where the hypotheses fail; used to probe
    /// how sharp a hypothesis is.
    ConclusionOnly,
}

pub fn verify_with(
    stmt: StatementId,
    inst: &Instance,
    budget: &mut Budget,
    checks: Checks,
) -> Result<Verdict, VerifyError> {
    let start = Instant::now();
    let finding = evaluate(stmt, inst, Route::Solver, budget, checks)?;
    let fingerprint = if stmt == StatementId::Figure1 {
        crate::instance::figure1_instance().fingerprint()
    } else {
        inst.fingerprint()
    };
    Ok(Verdict {
        stmt,
        fingerprint,
        outcome: finding.outcome,
        witness: finding.witness,
        ms: start.elapsed().as_millis() as u64,
    })
}

pub(crate) fn evaluate(
    stmt: StatementId,
    inst: &Instance,
    route: Route,
    budget: &mut Budget,
    checks: Checks,
) -> Result<Finding, VerifyError> {
    if stmt == StatementId::Figure1 {
        return Ok(crown::figure1(route, budget)?);
    }
    inst.lists.check_len(&inst.emb).map_err(|e| VerifyError::Input(e.to_string()))?;
    let eng = Eng::new(route, &inst.emb, &inst.lists);
    if let Err(reason) = hypotheses(stmt, inst, &eng, budget)? {
        if checks == Checks::Full || !conclusion_total(stmt) {
            return Ok(Finding::unmet(reason));
        }
    }
    Ok(match stmt {
        StatementId::Holepunch => crown::holepunch(inst, &eng, budget)?,
        StatementId::Figure1 => unreachable!(),
        StatementId::Thomassen => background::thomassen(inst, &eng, budget)?,
        StatementId::Cor22 => background::cor22(inst, &eng, budget)?,
        StatementId::Cor23 => background::cor23(inst, &eng, budget)?,
        StatementId::Obstruction => background::obstruction(inst, &eng, budget)?,
        StatementId::BrokenWheel => wheels::broken_wheel(inst, &eng, budget)?,
        StatementId::Lem44 => wheels::lem44(inst, &eng, budget)?,
        StatementId::Thm45 => wheels::thm45(inst, &eng, budget)?,
        StatementId::Cor46 => wheels::cor46(inst, &eng, budget)?,
        StatementId::Thm48 => ends::thm48(inst, &eng, budget)?,
        StatementId::Cor49 => ends::cor49(inst, route, budget)?,
        StatementId::Thm410 => ends::thm410(inst, &eng, budget)?,
        StatementId::Thm411 => ends::thm411(inst, &eng, budget)?,
        StatementId::Thm51 => ends::thm51(inst, &eng, budget)?,
        StatementId::Lem52 => ends::lem52(inst, &eng, budget)?,
    })
}

fn hypotheses(stmt: StatementId, inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Hyp, VerifyError> {
    Ok(match stmt {
        StatementId::Holepunch => crown::holepunch_hyp(inst),
        StatementId::Figure1 => Ok(()),
        StatementId::Thomassen => background::thomassen_hyp(inst),
        StatementId::Cor22 => background::cor22_hyp(inst),
        StatementId::Cor23 => background::cor23_hyp(inst),
        StatementId::Obstruction => background::obstruction_hyp(inst, eng, budget)?,
        StatementId::BrokenWheel => wheels::broken_wheel_hyp(inst),
        StatementId::Lem44 => wheels::lem44_hyp(inst),
        StatementId::Thm45 | StatementId::Cor46 => wheels::thm45_hyp(inst),
        StatementId::Thm48 => ends::thm48_hyp(inst),
        StatementId::Cor49 => ends::cor49_hyp(inst)?,
        StatementId::Thm410 => ends::thm410_hyp(inst),
        StatementId::Thm411 => ends::thm411_hyp(inst),
        StatementId::Thm51 => ends::thm51_hyp(inst),
        StatementId::Lem52 => ends::lem52_hyp(inst),
    })
}

/// Re-validates a verdict's certificate against `inst` through the oracle
/// route, without reusing the search that produced it. Returns `Ok(false)`
/// when the certificate does not support the reported outcome.
pub fn recheck(verdict: &Verdict, inst: &Instance) -> Result<bool, RecheckError> {
    recheck_with(verdict, inst, Checks::Full)
}

/// Statements whose conclusion can be evaluated without their hypotheses
/// (the others need the hypotheses to even name their objects).
fn conclusion_total(stmt: StatementId) -> bool {
    !matches!(stmt, StatementId::BrokenWheel | StatementId::Cor49)
}

pub fn recheck_with(verdict: &Verdict, inst: &Instance, checks: Checks) -> Result<bool, RecheckError> {
    let stmt = verdict.stmt;
    let w = &verdict.witness;
    let holds = verdict.outcome == Outcome::Holds;
    if stmt == StatementId::Figure1 {
        return crown::figure1_recheck(verdict);
    }
    if verdict.fingerprint != inst.fingerprint() || inst.lists.check_len(&inst.emb).is_err() {
        return Ok(false);
    }
    let eng = Eng::new(Route::Oracle, &inst.emb, &inst.lists);
    let mut budget = Budget::unlimited();
    let hyp = hypotheses(stmt, inst, &eng, &mut budget).map_err(|e| RecheckError::Malformed(e.to_string()))?;
    let skip = checks == Checks::ConclusionOnly && conclusion_total(stmt);
    match (verdict.outcome, hyp) {
        (Outcome::HypothesisNotMet, Err(reason)) => {
            return Ok(!skip && w.get("unmet").and_then(Value::as_str) == Some(reason.as_str()));
        }
        (Outcome::HypothesisNotMet, Ok(())) => return Ok(false),
        (_, Err(_)) if !skip => return Ok(false),
        _ => {}
    }
    match stmt {
        StatementId::Holepunch => crown::holepunch_recheck(inst, &eng, holds, w),
        StatementId::Figure1 => unreachable!(),
        StatementId::Thomassen | StatementId::Cor22 | StatementId::Cor23 => {
            background::all_extend_recheck(stmt, inst, &eng, holds, w)
        }
        StatementId::Obstruction => background::obstruction_recheck(inst, &eng, holds, w),
        StatementId::Thm48 | StatementId::Thm411 => ends::end_recheck(inst, &eng, holds, w),
        StatementId::Cor49 => ends::cor49_recheck(inst, holds, w),
        StatementId::Thm410 => ends::thm410_recheck(inst, &eng, holds, w),
        StatementId::Thm51 => ends::thm51_recheck(inst, &eng, holds, w),
        StatementId::Lem52 => ends::lem52_recheck(inst, &eng, holds, w),
        // Universally quantified checks with no explicit certificate are
        // recomputed on the oracle route and must agree exactly.
        StatementId::BrokenWheel | StatementId::Lem44 | StatementId::Thm45 | StatementId::Cor46 => {
            recompute(stmt, inst, verdict.outcome, w, checks)
        }
    }
}

/// Re-derives the finding on the oracle route and compares it exactly.
pub(crate) fn recompute(
    stmt: StatementId,
    inst: &Instance,
    outcome: Outcome,
    w: &Value,
    checks: Checks,
) -> Result<bool, RecheckError> {
    let again = evaluate(stmt, inst, Route::Oracle, &mut Budget::unlimited(), checks)
        .map_err(|e| RecheckError::Malformed(e.to_string()))?;
    Ok(again.outcome == outcome && &again.witness == w)
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

pub(crate) fn need_path(inst: &Instance, len: usize) -> Hyp {
    if inst.path.len() != len {
        return Err(format!("path must have {} vertices, has {}", len, inst.path.len()));
    }
    if !inst.emb.is_outer_subpath(&inst.path) {
        return Err("path is not a subpath of the outer cycle".into());
    }
    Ok(())
}

/// List-size conditions of a rainbow on `path`.
pub(crate) fn rainbow_sizes(inst: &Instance) -> Hyp {
    let pmask = mask_of(&inst.path);
    let outer = inst.emb.outer_mask();
    for v in 0..inst.emb.vertex_count() {
        let size = inst.lists.get(v).len();
        if outer & bit(v) == 0 && size < 5 {
            return Err(format!("interior vertex {v} has a list of size {size} < 5"));
        }
        if outer & bit(v) != 0 && pmask & bit(v) == 0 && size < 3 {
            return Err(format!("outer vertex {v} off the path has a list of size {size} < 3"));
        }
    }
    Ok(())
}

pub(crate) fn end_linked(inst: &Instance) -> Hyp {
    if crate::lists::end_linked(&inst.lists, &inst.path) {
        Ok(())
    } else {
        Err("endpoint lists are not end-linked".into())
    }
}

pub(crate) fn interior_at_least(emb: &PlanarEmbedding, lists: &ListAssignment, k: usize) -> Hyp {
    for v in emb.interior_vertices() {
        if lists.get(v).len() < k {
            return Err(format!("interior vertex {v} has a list of size {} < {k}", lists.get(v).len()));
        }
    }
    Ok(())
}

/// Neighbors of `v` on the outer cycle.
pub(crate) fn outer_neighbors(emb: &PlanarEmbedding, v: Vertex) -> (Vertex, Vertex) {
    let c = emb.outer_cycle();
    let k = c.len();
    let i = emb.outer_position(v).expect("vertex on the outer cycle");
    (c[(i + k - 1) % k], c[(i + 1) % k])
}

/// The outer-cycle neighbor of `v` other than `not`.
pub(crate) fn other_outer_neighbor(emb: &PlanarEmbedding, v: Vertex, not: Vertex) -> Vertex {
    let (a, b) = outer_neighbors(emb, v);
    if a == not {
        b
    } else {
        a
    }
}

/// Compact serialized colorings: vertex-color pairs.
pub(crate) type Pairs = Vec<(Vertex, Color)>;

pub(crate) fn to_coloring(n: usize, pairs: &Pairs) -> Result<PartialColoring, RecheckError> {
    if pairs.iter().any(|&(v, _)| v >= n) {
        return Err(RecheckError::Malformed("vertex out of range".into()));
    }
    Ok(PartialColoring::from_pairs(n, pairs))
}
