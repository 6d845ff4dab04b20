//! The Crown statement for 4-paths and the built-in instance showing that
//! its common-neighbor condition cannot be dropped.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::engine::{CrownReason, Eng, Route};
use super::{end_linked, need_path, parse, rainbow_sizes, to_coloring, Finding, Hyp, Pairs, RecheckError, Verdict};
use crate::embedding::Vertex;
use crate::generator::inner_common_neighbor;
use crate::instance::{figure1_instance, Instance};
use crate::lists::{reduced_list, PartialColoring};
use crate::oracle;
use crate::solver::{Budget, Timeout};
use crate::structure::{recheck_crown, terminal_neighbors};

#[derive(Debug, Serialize, Deserialize)]
struct Crowned {
    crown: Pairs,
    /// `|L_phi(q0)|` and `|L_phi(q1)|`.
    reduced: [usize; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct NoCrown {
    crown: Option<Pairs>,
}

pub(super) fn holepunch_hyp(inst: &Instance) -> Hyp {
    need_path(inst, 5)?;
    rainbow_sizes(inst)?;
    end_linked(inst)?;
    for &v in &inst.path[1..4] {
        let size = inst.lists.get(v).len();
        if size < 5 {
            return Err(format!("internal path vertex {v} has a list of size {size} < 5"));
        }
    }
    if let Some(u) = inner_common_neighbor(&inst.emb, &inst.path) {
        return Err(format!("q0, z, q1 have a common neighbor {u} in C - P"));
    }
    Ok(())
}

fn reduced_sizes(inst: &Instance, phi: &PartialColoring) -> [usize; 2] {
    let (q0, q1) = terminal_neighbors(&inst.path);
    [q0, q1].map(|q| reduced_list(&inst.emb, &inst.lists, phi, q).len())
}

pub(super) fn holepunch(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    Ok(match eng.crown_first(&inst.path, budget)? {
        Some(phi) => {
            let reduced = reduced_sizes(inst, &phi);
            let w = Crowned { crown: phi.pairs(), reduced };
            if reduced.iter().all(|&s| s >= 3) {
                Finding::holds(w)
            } else {
                Finding::fails(w)
            }
        }
        None => Finding::fails(NoCrown { crown: None }),
    })
}

pub(super) fn holepunch_recheck(inst: &Instance, eng: &Eng, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    let n = inst.emb.vertex_count();
    if let Ok(cert) = parse::<Crowned>(w) {
        let phi = to_coloring(n, &cert.crown)?;
        let tight = cert.reduced.iter().all(|&s| s >= 3);
        return Ok(recheck_crown(&inst.emb, &inst.lists, &inst.path, &phi).is_ok()
            && reduced_sizes(inst, &phi) == cert.reduced
            && tight == holds);
    }
    let cert: NoCrown = parse(w)?;
    let mut budget = Budget::unlimited();
    Ok(!holds && cert.crown.is_none() && eng.crown_first(&inst.path, &mut budget).ok().flatten().is_none())
}

// ---------------------------------------------------------------------------
// Figure 1
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct Entry {
    phi: Pairs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slack: Option<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fails: Option<Pairs>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmptinessLog {
    common_neighbor: Option<Vertex>,
    candidates: Vec<Entry>,
}

/// Every candidate partial coloring with the reason it is not a Crown
/// element: a terminal neighbor losing more than two colors, or an
/// extension over the path that does not extend.
pub(super) fn figure1(route: Route, budget: &mut Budget) -> Result<Finding, Timeout> {
    let inst = figure1_instance();
    let eng = Eng::new(route, &inst.emb, &inst.lists);
    if let Some(phi) = eng.crown_first(&inst.path, budget)? {
        return Ok(Finding::fails(Crowned { reduced: reduced_sizes(&inst, &phi), crown: phi.pairs() }));
    }
    let oracle_eng = Eng::new(Route::Oracle, &inst.emb, &inst.lists);
    let mut candidates = Vec::new();
    let _ = oracle_eng.crown_candidates(&inst.path, &mut |phi, reason| {
        let mut e = Entry { phi: phi.pairs(), slack: None, fails: None };
        match reason {
            Some(CrownReason::Slack(v)) => e.slack = Some(v),
            Some(CrownReason::Fails(psi)) => e.fails = Some(psi.pairs()),
            None => unreachable!("the Crown was found empty"),
        }
        candidates.push(e);
        ControlFlow::Continue(())
    });
    Ok(Finding::holds(EmptinessLog { common_neighbor: inner_common_neighbor(&inst.emb, &inst.path), candidates }))
}

/// Checks an emptiness log entry by entry: the candidates are exactly the
/// L-colorings of the admissible domains, in order, and each stated reason
/// is verified directly.
pub(super) fn figure1_recheck(verdict: &Verdict) -> Result<bool, RecheckError> {
    let inst = figure1_instance();
    if verdict.fingerprint != inst.fingerprint() {
        return Ok(false);
    }
    let n = inst.emb.vertex_count();
    if verdict.outcome != super::Outcome::Holds {
        let cert: Crowned = parse(&verdict.witness)?;
        let phi = to_coloring(n, &cert.crown)?;
        return Ok(recheck_crown(&inst.emb, &inst.lists, &inst.path, &phi).is_ok());
    }
    let log: EmptinessLog = parse(&verdict.witness)?;
    if log.common_neighbor != inner_common_neighbor(&inst.emb, &inst.path) {
        return Ok(false);
    }
    let eng = Eng::new(Route::Oracle, &inst.emb, &inst.lists);
    let mut expected = Vec::new();
    let _ = eng.crown_candidates(&inst.path, &mut |phi, _| {
        expected.push(phi.clone());
        ControlFlow::Continue(())
    });
    if expected.len() != log.candidates.len() {
        return Ok(false);
    }
    for (phi, e) in expected.iter().zip(&log.candidates) {
        if to_coloring(n, &e.phi)? != *phi {
            return Ok(false);
        }
        let ok = match (e.slack, &e.fails) {
            (Some(v), None) => {
                let (q0, q1) = terminal_neighbors(&inst.path);
                (v == q0 || v == q1) && reduced_list(&inst.emb, &inst.lists, phi, v).len() + 2 < inst.lists.get(v).len()
            }
            (None, Some(psi)) => {
                let psi = to_coloring(n, psi)?;
                psi.extends(phi)
                    && inst.path.iter().all(|&v| psi.get(v).is_some())
                    && psi.domain_mask() == phi.domain_mask() | crate::embedding::mask_of(&inst.path)
                    && eng.valid(&psi)
                    && !oracle::extends(&inst.emb, &inst.lists, &psi)
            }
            _ => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
