//! End sets of 2- and 3-paths, the gluing corollary, corner colorings and
//! the 4-path box lemma.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::engine::{Eng, Route};
use super::{
    end_linked, need_path, parse, rainbow_sizes, recompute, to_coloring, Checks, Finding, Hyp, Outcome, Pairs,
    RecheckError, StatementId, VerifyError,
};
use crate::color::Color;
use crate::embedding::{
    bit, is_short_separation_free, mask_iter, mask_of, outer_chords, subgraph_bounded_by, PlanarEmbedding,
    SubEmbedding, Vertex,
};
use crate::instance::Instance;
use crate::lists::{check_coloring, colors_at, reduced_list, ListAssignment, PartialColoring};
use crate::oracle;
use crate::solver::{Budget, Timeout};
use crate::structure::{recheck_crown, recheck_end};

fn ends(path: &[Vertex]) -> u64 {
    bit(path[0]) | bit(*path.last().unwrap())
}

fn rainbow(inst: &Instance, len: usize) -> Hyp {
    need_path(inst, len)?;
    rainbow_sizes(inst)?;
    end_linked(inst)
}

fn chord_at(emb: &PlanarEmbedding, v: Vertex) -> bool {
    outer_chords(emb).iter().any(|&(a, b)| a == v || b == v)
}

#[derive(Debug, Serialize, Deserialize)]
struct EndWitness {
    end: Option<Pairs>,
}

pub(super) fn thm48_hyp(inst: &Instance) -> Hyp {
    rainbow(inst, 3)
}

pub(super) fn thm411_hyp(inst: &Instance) -> Hyp {
    rainbow(inst, 4)?;
    let p = &inst.path;
    if inst.lists.get(p[3]).len() < 3 {
        return Err(format!("last path vertex has a list of size {} < 3", inst.lists.get(p[3]).len()));
    }
    let on_c = inst.emb.adjacency_mask(p[2]) & inst.emb.outer_mask();
    if on_c != bit(p[1]) | bit(p[3]) {
        return Err("third path vertex has a neighbor on C besides its path neighbors".into());
    }
    Ok(())
}

fn end_nonempty(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    Ok(match eng.end_first(&inst.path, &[], budget)? {
        Some(phi) => Finding::holds(EndWitness { end: Some(phi.pairs()) }),
        None => Finding::fails(EndWitness { end: None }),
    })
}

pub(super) fn thm48(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    end_nonempty(inst, eng, budget)
}

pub(super) fn thm411(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    end_nonempty(inst, eng, budget)
}

fn valid_end(inst: &Instance, pairs: &Pairs, domain: u64) -> Result<bool, RecheckError> {
    let phi = to_coloring(inst.emb.vertex_count(), pairs)?;
    Ok(phi.domain_mask() == domain && recheck_end(&inst.emb, &inst.lists, &inst.path, &phi))
}

pub(super) fn end_recheck(inst: &Instance, eng: &Eng, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    let cert: EndWitness = parse(w)?;
    match (holds, &cert.end) {
        (true, Some(pairs)) => valid_end(inst, pairs, ends(&inst.path)),
        (false, None) => Ok(eng.end_first(&inst.path, &[], &mut Budget::unlimited()).ok().flatten().is_none()),
        _ => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// 3-paths: Crown and End sets with a small H
// ---------------------------------------------------------------------------

pub(super) fn thm410_hyp(inst: &Instance) -> Hyp {
    rainbow(inst, 4)
}

#[derive(Debug, Serialize, Deserialize)]
struct CrownAndEnds {
    crown: Pairs,
    h: Vec<Vertex>,
    end: Pairs,
    end2: Option<Pairs>,
}

/// Vertex sets of C - P in the neighborhoods of the endpoints meeting each
/// neighborhood at most once, by size then lexicographically.
fn eligible_h(inst: &Instance) -> Vec<Vec<Vertex>> {
    let emb = &inst.emb;
    let (p1, p4) = (inst.path[0], inst.path[3]);
    let (n1, n4) = (emb.adjacency_mask(p1), emb.adjacency_mask(p4));
    let pool: Vec<Vertex> = mask_iter(emb.outer_mask() & !mask_of(&inst.path) & (n1 | n4)).collect();
    let fits = |s: u64| (s & n1).count_ones() <= 1 && (s & n4).count_ones() <= 1;
    let mut out = vec![Vec::new()];
    for &a in &pool {
        if fits(bit(a)) {
            out.push(vec![a]);
        }
    }
    for (i, &a) in pool.iter().enumerate() {
        for &b in &pool[i + 1..] {
            if fits(bit(a) | bit(b)) {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

fn part2_applies(inst: &Instance) -> bool {
    !chord_at(&inst.emb, inst.path[1]) && !chord_at(&inst.emb, inst.path[2])
}

pub(super) fn thm410(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let Some(crown) = eng.crown_first(&inst.path, budget)? else {
        return Ok(Finding::fails(json!({ "part": "1-crown" })));
    };
    let mut found = None;
    for h in eligible_h(inst) {
        if let Some(end) = eng.end_first(&inst.path, &h, budget)? {
            found = Some((h, end));
            break;
        }
    }
    let Some((h, end)) = found else {
        return Ok(Finding::fails(json!({ "part": "1-end" })));
    };
    let end2 = if part2_applies(inst) {
        match eng.end_first(&inst.path, &[], budget)? {
            Some(e) => Some(e.pairs()),
            None => return Ok(Finding::fails(json!({ "part": "2" }))),
        }
    } else {
        None
    };
    Ok(Finding::holds(CrownAndEnds { crown: crown.pairs(), h, end: end.pairs(), end2 }))
}

pub(super) fn thm410_recheck(inst: &Instance, _eng: &Eng, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    if !holds {
        return recompute(StatementId::Thm410, inst, Outcome::Counterexample, w, Checks::ConclusionOnly);
    }
    let cert: CrownAndEnds = parse(w)?;
    let n = inst.emb.vertex_count();
    let crown = to_coloring(n, &cert.crown)?;
    if recheck_crown(&inst.emb, &inst.lists, &inst.path, &crown).is_err() {
        return Ok(false);
    }
    if !eligible_h(inst).contains(&cert.h) || !valid_end(inst, &cert.end, ends(&inst.path) | mask_of(&cert.h))? {
        return Ok(false);
    }
    match (&cert.end2, part2_applies(inst)) {
        (Some(e), true) => valid_end(inst, e, ends(&inst.path)),
        (None, false) => Ok(true),
        _ => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// Corner colorings
// ---------------------------------------------------------------------------

pub(super) fn thm51_hyp(inst: &Instance) -> Hyp {
    rainbow(inst, 4)?;
    let size = inst.lists.get(inst.path[2]).len();
    if size < 5 {
        return Err(format!("third path vertex has a list of size {size} < 5"));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
struct Corner {
    psi: Pairs,
    good: Vec<Color>,
    free: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Corners {
    part1: Option<Corner>,
    part2: Option<Corner>,
    part2_applies: bool,
}

pub(super) fn thm51(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let p = &inst.path;
    let (p1, p3, p4) = (p[0], p[2], p[3]);
    let applies2 = !chord_at(&inst.emb, p3);
    let mut part1 = None;
    let mut part2 = None;
    for psi in eng.colorings(&[p1, p4]) {
        let free = reduced_list(&inst.emb, &inst.lists, &psi, p3);
        let mut good = Vec::new();
        for c in free {
            let mut phi = psi.clone();
            phi.set(p3, c);
            if eng.sufficient(&phi, p, budget)? {
                good.push(c);
            }
        }
        let corner = Corner { psi: psi.pairs(), good, free: free.len() };
        if part1.is_none() && corner.good.len() + 2 >= corner.free {
            part1 = Some(Corner { psi: corner.psi.clone(), good: corner.good.clone(), free: corner.free });
        }
        if applies2 && part2.is_none() && corner.good.len() + 1 >= corner.free {
            part2 = Some(corner);
        }
        if part1.is_some() && (part2.is_some() || !applies2) {
            break;
        }
    }
    let done = part1.is_some() && (part2.is_some() || !applies2);
    let w = Corners { part1, part2, part2_applies: applies2 };
    Ok(if done { Finding::holds(w) } else { Finding::fails(w) })
}

pub(super) fn thm51_recheck(inst: &Instance, _eng: &Eng, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    if !holds {
        return recompute(StatementId::Thm51, inst, Outcome::Counterexample, w, Checks::ConclusionOnly);
    }
    let cert: Corners = parse(w)?;
    let p = &inst.path;
    let n = inst.emb.vertex_count();
    let check = |c: &Corner, slack: usize| -> Result<bool, RecheckError> {
        let psi = to_coloring(n, &c.psi)?;
        if psi.domain_mask() != ends(p) || check_coloring(&inst.emb, &inst.lists, &psi).is_err() {
            return Ok(false);
        }
        let free = reduced_list(&inst.emb, &inst.lists, &psi, p[2]);
        let mut seen = crate::color::ColorSet::EMPTY;
        for &c in &c.good {
            if !free.contains(c) || seen.contains(c) {
                return Ok(false);
            }
            seen.insert(c);
            let mut phi = psi.clone();
            phi.set(p[2], c);
            if !recheck_end(&inst.emb, &inst.lists, p, &phi) {
                return Ok(false);
            }
        }
        Ok(c.free == free.len() && c.good.len() + slack >= c.free)
    };
    let Some(c1) = &cert.part1 else { return Ok(false) };
    if !check(c1, 2)? || cert.part2_applies != !chord_at(&inst.emb, p[2]) {
        return Ok(false);
    }
    match (&cert.part2, cert.part2_applies) {
        (Some(c2), true) => check(c2, 1),
        (None, false) => Ok(true),
        _ => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// The 4-path box lemma
// ---------------------------------------------------------------------------

pub(super) fn lem52_hyp(inst: &Instance) -> Hyp {
    rainbow(inst, 5)?;
    let emb = &inst.emb;
    if !is_short_separation_free(emb) {
        return Err("not short-separation-free".into());
    }
    let outer = emb.outer_face_index();
    if emb.faces().iter().enumerate().any(|(i, f)| i != outer && f.len() != 3) {
        return Err("some bounded face is not a triangle".into());
    }
    let w = inst.path[2];
    if inst.lists.get(w).len() < 5 {
        return Err(format!("middle path vertex has a list of size {} < 5", inst.lists.get(w).len()));
    }
    if chord_at(emb, w) {
        return Err("a chord of C meets the middle path vertex".into());
    }
    Ok(())
}

fn box_domains(inst: &Instance, i: usize) -> Vec<Vec<Vertex>> {
    let emb = &inst.emb;
    let p = &inst.path;
    let (q0, q1) = (p[1], p[3]);
    let nq = [emb.adjacency_mask(q0), emb.adjacency_mask(q1)];
    let optional: Vec<Vertex> = mask_iter(emb.outer_mask() & !mask_of(p) & (nq[0] | nq[1]) & !nq[i]).collect();
    (0u64..(1u64 << optional.len()))
        .map(|sub| {
            let mut d = vec![p[0], p[4]];
            d.extend(optional.iter().enumerate().filter(|(k, _)| sub >> k & 1 == 1).map(|(_, &v)| v));
            d.sort_unstable();
            d
        })
        .collect()
}

/// No two extensions of `phi` over q0, q1 force different single colors on w.
fn box_good(inst: &Instance, eng: &Eng, phi: &PartialColoring, budget: &mut Budget) -> Result<bool, Timeout> {
    let p = &inst.path;
    let mut forced: Option<Color> = None;
    for psi in oracle::extensions_over(&inst.emb, &inst.lists, phi, &[p[1], p[3]]) {
        let w = eng.achievable(&psi, p[2], budget)?;
        if w.len() == 1 {
            let c = w.min().unwrap();
            match forced {
                Some(f) if f != c => return Ok(false),
                _ => forced = Some(c),
            }
        }
    }
    Ok(true)
}

pub(super) fn lem52(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let mut phis: Vec<Pairs> = Vec::new();
    for i in 0..2 {
        let mut found = None;
        'search: for dom in box_domains(inst, i) {
            for phi in eng.colorings(&dom) {
                if box_good(inst, eng, &phi, budget)? {
                    found = Some(phi);
                    break 'search;
                }
            }
        }
        match found {
            Some(phi) => phis.push(phi.pairs()),
            None => return Ok(Finding::fails(json!({ "i": i }))),
        }
    }
    Ok(Finding::holds(json!({ "phi": phis })))
}

pub(super) fn lem52_recheck(inst: &Instance, eng: &Eng, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    if !holds {
        return recompute(StatementId::Lem52, inst, Outcome::Counterexample, w, Checks::ConclusionOnly);
    }
    #[derive(Deserialize)]
    struct Cert {
        phi: Vec<Pairs>,
    }
    let cert: Cert = parse(w)?;
    if cert.phi.len() != 2 {
        return Ok(false);
    }
    let n = inst.emb.vertex_count();
    for (i, pairs) in cert.phi.iter().enumerate() {
        let phi = to_coloring(n, pairs)?;
        let dom = phi.domain();
        if !box_domains(inst, i).contains(&dom) || !eng.valid(&phi) {
            return Ok(false);
        }
        if !box_good(inst, eng, &phi, &mut Budget::unlimited()).unwrap_or(false) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Gluing along a chord from the second path vertex
// ---------------------------------------------------------------------------

/// `C - P̊` walked from the first path vertex to the last.
fn rest_arc(emb: &PlanarEmbedding, path: &[Vertex]) -> Vec<Vertex> {
    let c = emb.outer_cycle();
    let k = c.len();
    let start = emb.outer_position(path[0]).unwrap();
    let step = if c[(start + 1) % k] == path[1] { k - 1 } else { 1 };
    let last = *path.last().unwrap();
    let mut out = vec![path[0]];
    let mut i = start;
    while c[i] != last {
        i = (i + step) % k;
        out.push(c[i]);
    }
    out
}

struct Glue {
    x: Vertex,
    family: Vec<PartialColoring>,
    /// `K` with its vertex map; `None` when `x = p`.
    k: Option<SubEmbedding>,
}

fn glue_setup(inst: &Instance) -> Result<Result<Glue, String>, VerifyError> {
    let x = inst.x.ok_or_else(|| VerifyError::Input("COR_4_9 needs the vertex \"x\"".into()))?;
    let family = inst.family.clone().ok_or_else(|| VerifyError::Input("COR_4_9 needs the family \"family\"".into()))?;
    if inst.path.len() < 3 || !inst.emb.is_outer_subpath(&inst.path) {
        return Ok(Err("path is not a subpath of the outer cycle with at least 3 vertices".into()));
    }
    if let Err(e) = rainbow_sizes(inst).and_then(|_| end_linked(inst)) {
        return Ok(Err(e));
    }
    let emb = &inst.emb;
    let path = &inst.path;
    let (p, q, p2) = (path[0], path[1], *path.last().unwrap());
    let arc = rest_arc(emb, path);
    let Some(ix) = arc.iter().position(|&v| v == x).filter(|_| x != p2) else {
        return Ok(Err(format!("x = {x} is not on C - P̊ minus the last path vertex")));
    };
    if !emb.has_edge(q, x) {
        return Ok(Err(format!("{q}-{x} is not an edge")));
    }
    let mut h_cycle: Vec<Vertex> = arc[ix..].to_vec();
    h_cycle.extend(path[1..path.len() - 1].iter().rev());
    let h = match subgraph_bounded_by(emb, &h_cycle) {
        Ok(h) => h,
        Err(e) => return Ok(Err(format!("H is not bounded by a cycle: {e}"))),
    };
    let h_mask = mask_of(&h.to_parent);
    if family.is_empty() {
        return Ok(Err("family is empty".into()));
    }
    for (i, psi) in family.iter().enumerate() {
        if psi.len() != emb.vertex_count()
            || psi.get(x).is_none()
            || psi.domain_mask() & !h_mask != 0
            || check_coloring(emb, &inst.lists, psi).is_err()
        {
            return Ok(Err(format!("family member {i} is not a partial L-coloring of H with x in its domain")));
        }
    }
    let cols = colors_at(&family, x).expect("x in every domain");
    if x != p && cols.len() < inst.lists.get(p2).len() {
        return Ok(Err(format!("|Col(F|x)| = {} < |L(p')| = {}", cols.len(), inst.lists.get(p2).len())));
    }
    let k = if x == p {
        None
    } else {
        let mut k_cycle: Vec<Vertex> = arc[..=ix].to_vec();
        k_cycle.push(q);
        match subgraph_bounded_by(emb, &k_cycle) {
            Ok(k) => Some(k),
            Err(e) => return Ok(Err(format!("K is not bounded by a cycle: {e}"))),
        }
    };
    Ok(Ok(Glue { x, family, k }))
}

pub(super) fn cor49_hyp(inst: &Instance) -> Result<Hyp, VerifyError> {
    Ok(glue_setup(inst)?.map(|_| ()))
}

fn local_lists(sub: &SubEmbedding, lists: &ListAssignment) -> ListAssignment {
    ListAssignment::new(sub.to_parent.iter().map(|&v| lists.get(v)).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct Glued {
    phi: Option<Pairs>,
    psi: Option<usize>,
    degenerate: bool,
}

pub(super) fn cor49(inst: &Instance, route: Route, budget: &mut Budget) -> Result<Finding, VerifyError> {
    let g = glue_setup(inst)?.expect("checked by the hypotheses");
    let (p, q) = (inst.path[0], inst.path[1]);
    let cols = colors_at(&g.family, g.x).expect("x in every domain");
    let n = inst.emb.vertex_count();
    let found = match &g.k {
        None => inst.lists.get(p).intersection(cols).min().map(|c| PartialColoring::from_pairs(n, &[(p, c)])),
        Some(k) => {
            let lk = local_lists(k, &inst.lists);
            let eng = Eng::new(route, &k.embedding, &lk);
            let (pl, xl, ql) = (k.local(p).unwrap(), k.local(g.x).unwrap(), k.local(q).unwrap());
            let mut found = None;
            for phi in eng.colorings(&[pl, xl]) {
                if cols.contains(phi.get(xl).unwrap()) && eng.sufficient(&phi, &[ql], budget)? {
                    let pairs: Pairs = phi.pairs().into_iter().map(|(v, c)| (k.to_parent[v], c)).collect();
                    found = Some(PartialColoring::from_pairs(n, &pairs));
                    break;
                }
            }
            found
        }
    };
    let degenerate = g.k.is_none();
    Ok(match found {
        Some(phi) => {
            let c = phi.get(g.x).unwrap();
            let i = g.family.iter().position(|psi| psi.get(g.x) == Some(c));
            Finding::holds(Glued { phi: Some(phi.pairs()), psi: i, degenerate })
        }
        None => Finding::fails(Glued { phi: None, psi: None, degenerate }),
    })
}

pub(super) fn cor49_recheck(inst: &Instance, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    let cert: Glued = parse(w)?;
    let g = match glue_setup(inst) {
        Ok(Ok(g)) => g,
        _ => return Ok(false),
    };
    if cert.degenerate != g.k.is_none() {
        return Ok(false);
    }
    if !holds {
        return recompute(StatementId::Cor49, inst, Outcome::Counterexample, w, Checks::ConclusionOnly);
    }
    let (Some(pairs), Some(i)) = (&cert.phi, cert.psi) else {
        return Ok(false);
    };
    let (p, q) = (inst.path[0], inst.path[1]);
    let n = inst.emb.vertex_count();
    let phi = to_coloring(n, pairs)?;
    let Some(psi) = g.family.get(i) else { return Ok(false) };
    if phi.domain_mask() != bit(p) | bit(g.x)
        || check_coloring(&inst.emb, &inst.lists, &phi).is_err()
        || phi.get(g.x) != psi.get(g.x)
    {
        return Ok(false);
    }
    match &g.k {
        None => Ok(true),
        Some(k) => {
            let lk = local_lists(k, &inst.lists);
            let local: Pairs = phi.pairs().into_iter().map(|(v, c)| (k.local(v).unwrap(), c)).collect();
            let phil = PartialColoring::from_pairs(k.embedding.vertex_count(), &local);
            Ok(oracle::sufficient(&k.embedding, &lk, &phil, &[k.local(q).unwrap()]))
        }
    }
}
