//! Precoloring extension facts for short outer paths and short cycles.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::engine::Eng;
use super::{
    interior_at_least, need_path, other_outer_neighbor, parse, to_coloring, Finding, Hyp, Pairs, RecheckError,
    StatementId,
};
use crate::color::Color;
use crate::embedding::{bit, mask_iter, mask_of, short_separation_witness, PlanarEmbedding, Vertex};
use crate::instance::Instance;
use crate::lists::PartialColoring;
use crate::oracle;
use crate::solver::{Budget, Timeout};

#[derive(Debug, Serialize, Deserialize)]
struct Ext {
    coloring: Pairs,
    extension: Vec<Color>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AllExtend {
    extensions: Vec<Ext>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Stuck {
    coloring: Pairs,
}

fn off_path_at_least(inst: &Instance, skip: u64, k: usize) -> Hyp {
    for &v in inst.emb.outer_cycle() {
        let size = inst.lists.get(v).len();
        if skip & bit(v) == 0 && size < k {
            return Err(format!("outer vertex {v} has a list of size {size} < {k}"));
        }
    }
    Ok(())
}

pub(super) fn thomassen_hyp(inst: &Instance) -> Hyp {
    need_path(inst, 2)?;
    interior_at_least(&inst.emb, &inst.lists, 5)?;
    off_path_at_least(inst, mask_of(&inst.path), 3)
}

pub(super) fn cor22_hyp(inst: &Instance) -> Hyp {
    let k = inst.emb.outer_cycle().len();
    if k > 4 {
        return Err(format!("outer cycle has length {k} > 4"));
    }
    interior_at_least(&inst.emb, &inst.lists, 5)
}

fn cor23_neighbors(inst: &Instance) -> (Vertex, Vertex) {
    let (p0, p1) = (inst.path[0], inst.path[1]);
    (other_outer_neighbor(&inst.emb, p0, p1), other_outer_neighbor(&inst.emb, p1, p0))
}

pub(super) fn cor23_hyp(inst: &Instance) -> Hyp {
    need_path(inst, 2)?;
    interior_at_least(&inst.emb, &inst.lists, 5)?;
    let (u0, u1) = cor23_neighbors(inst);
    off_path_at_least(inst, mask_of(&inst.path) | bit(u0) | bit(u1), 3)
}

/// The colorings whose extendability the statement asserts.
fn targets(stmt: StatementId, inst: &Instance, eng: &Eng) -> Vec<PartialColoring> {
    match stmt {
        StatementId::Thomassen => eng.colorings(&inst.path),
        StatementId::Cor22 => eng.colorings(inst.emb.outer_cycle()),
        StatementId::Cor23 => {
            let (u0, u1) = cor23_neighbors(inst);
            let (p0, p1) = (inst.path[0], inst.path[1]);
            eng.colorings(&inst.path)
                .into_iter()
                .filter(|phi| {
                    inst.lists.get(u0).without(phi.get(p0).unwrap()).len() >= 2
                        && inst.lists.get(u1).without(phi.get(p1).unwrap()).len() >= 2
                })
                .collect()
        }
        _ => unreachable!("not an all-extend statement"),
    }
}

fn all_extend(stmt: StatementId, inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let mut extensions = Vec::new();
    for phi in targets(stmt, inst, eng) {
        match eng.extension(&phi, budget)? {
            Some(extension) => extensions.push(Ext { coloring: phi.pairs(), extension }),
            None => return Ok(Finding::fails(Stuck { coloring: phi.pairs() })),
        }
    }
    Ok(Finding::holds(AllExtend { extensions }))
}

pub(super) fn thomassen(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    all_extend(StatementId::Thomassen, inst, eng, budget)
}

pub(super) fn cor22(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    all_extend(StatementId::Cor22, inst, eng, budget)
}

pub(super) fn cor23(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    all_extend(StatementId::Cor23, inst, eng, budget)
}

/// Holds: the listed extensions cover exactly the target colorings and each
/// one is a proper L-coloring agreeing with its target. Counterexample: the
/// target does not extend.
pub(super) fn all_extend_recheck(
    stmt: StatementId,
    inst: &Instance,
    eng: &Eng,
    holds: bool,
    w: &Value,
) -> Result<bool, RecheckError> {
    let n = inst.emb.vertex_count();
    let expected = targets(stmt, inst, eng);
    if holds {
        let cert: AllExtend = parse(w)?;
        if cert.extensions.len() != expected.len() {
            return Ok(false);
        }
        for (e, phi) in cert.extensions.iter().zip(&expected) {
            let claimed = to_coloring(n, &e.coloring)?;
            if &claimed != phi || !oracle::is_l_coloring(&inst.emb, &inst.lists, &e.extension) {
                return Ok(false);
            }
            if !PartialColoring::full(&e.extension).extends(phi) {
                return Ok(false);
            }
        }
        Ok(true)
    } else {
        let cert: Stuck = parse(w)?;
        let phi = to_coloring(n, &cert.coloring)?;
        Ok(expected.contains(&phi) && !oracle::extends(&inst.emb, &inst.lists, &phi))
    }
}

// ---------------------------------------------------------------------------
// Obstructions to extending a precolored short cycle
// ---------------------------------------------------------------------------

/// The interior configurations that block a precoloring of a facial 5- or
/// 6-cycle in a short-separation-free graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    #[serde(rename = "lone-vertex")]
    LoneVertex,
    #[serde(rename = "edge")]
    Edge,
    #[serde(rename = "triangle")]
    Triangle,
}

#[derive(Debug, Serialize, Deserialize)]
struct Classified {
    shape: Shape,
    interior: Vec<Vertex>,
    coloring: Pairs,
}

#[derive(Debug, Serialize, Deserialize)]
struct Misfit {
    defect: String,
    coloring: Pairs,
}

/// Whether `vs` induces a path with exactly `len` edges.
fn induces_path(emb: &PlanarEmbedding, vs: u64, len: usize) -> bool {
    if vs.count_ones() as usize != len + 1 {
        return false;
    }
    let mut edges = 0;
    for v in mask_iter(vs) {
        let d = (emb.adjacency_mask(v) & vs).count_ones() as usize;
        if d > 2 || (len > 0 && d == 0) {
            return false;
        }
        edges += d;
    }
    if edges / 2 != len {
        return false;
    }
    // Connected with |V| - 1 edges, hence a tree of max degree 2.
    let start = vs.trailing_zeros() as usize;
    let mut seen = bit(start);
    let mut frontier = bit(start);
    while frontier != 0 {
        let mut next = 0;
        for v in mask_iter(frontier) {
            next |= emb.adjacency_mask(v) & vs & !seen;
        }
        seen |= next;
        frontier = next;
    }
    seen == vs
}

/// Matches the interior of `emb` against the obstruction shapes for its
/// outer cycle, or says which condition fails.
pub fn classify_obstruction(emb: &PlanarEmbedding) -> Result<(Shape, Vec<Vertex>), String> {
    let k = emb.outer_cycle().len();
    let outer = emb.outer_mask();
    let inner = emb.interior_vertices();
    let inner_mask = mask_of(&inner);
    let on_c = |v: Vertex| emb.adjacency_mask(v) & outer;
    match k {
        5 => {
            if inner.len() == 1 && on_c(inner[0]) == outer {
                Ok((Shape::LoneVertex, inner))
            } else {
                Err("5-cycle interior is not a lone vertex adjacent to all of C".into())
            }
        }
        6 => {
            if inner.is_empty() || inner.len() > 3 {
                return Err(format!("6-cycle interior has {} vertices", inner.len()));
            }
            if let Some(&v) = inner.iter().find(|&&v| on_c(v).count_ones() < 3) {
                return Err(format!("interior vertex {v} has fewer than three neighbors on C"));
            }
            let clique = inner.iter().all(|&v| emb.adjacency_mask(v) & inner_mask == inner_mask & !bit(v));
            match inner.len() {
                1 if on_c(inner[0]).count_ones() >= 5 => Ok((Shape::LoneVertex, inner)),
                2 if clique && inner.iter().all(|&v| induces_path(emb, on_c(v), 3)) => Ok((Shape::Edge, inner)),
                3 if clique && inner.iter().all(|&v| induces_path(emb, on_c(v), 2)) => Ok((Shape::Triangle, inner)),
                m => Err(format!("6-cycle interior on {m} vertices matches no listed shape")),
            }
        }
        _ => Err(format!("outer cycle has length {k}, outside 5..=6")),
    }
}

pub(super) fn obstruction_hyp(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Hyp, Timeout> {
    if let Some(cycle) = short_separation_witness(&inst.emb) {
        return Ok(Err(format!("not short-separation-free: cycle {cycle:?} separates")));
    }
    if let Err(e) = interior_at_least(&inst.emb, &inst.lists, 5) {
        return Ok(Err(e));
    }
    let k = inst.emb.outer_cycle().len();
    if k > 6 {
        return Ok(Err(format!("outer cycle has length {k} > 6")));
    }
    if eng.first_coloring(inst.emb.outer_cycle(), budget)?.is_none() {
        return Ok(Err("V(C) is not L-colorable".into()));
    }
    let n = inst.emb.vertex_count();
    if eng.extends(&PartialColoring::empty(n), budget)? {
        return Ok(Err("G is L-colorable".into()));
    }
    Ok(Ok(()))
}

pub(super) fn obstruction(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let phi = eng.first_coloring(inst.emb.outer_cycle(), budget)?.expect("checked by the hypotheses");
    Ok(match classify_obstruction(&inst.emb) {
        Ok((shape, interior)) => Finding::holds(Classified { shape, interior, coloring: phi.pairs() }),
        Err(defect) => Finding::fails(Misfit { defect, coloring: phi.pairs() }),
    })
}

/// The reported coloring of V(C) must be a non-extending L-coloring, and
/// the classification must be reproduced.
pub(super) fn obstruction_recheck(inst: &Instance, eng: &Eng, holds: bool, w: &Value) -> Result<bool, RecheckError> {
    let n = inst.emb.vertex_count();
    let stuck = |pairs: &Pairs| -> Result<bool, RecheckError> {
        let phi = to_coloring(n, pairs)?;
        Ok(phi.domain_mask() == inst.emb.outer_mask()
            && eng.valid(&phi)
            && !oracle::extends(&inst.emb, &inst.lists, &phi))
    };
    let got = classify_obstruction(&inst.emb);
    if holds {
        let cert: Classified = parse(w)?;
        Ok(stuck(&cert.coloring)? && got == Ok((cert.shape, cert.interior)))
    } else {
        let cert: Misfit = parse(w)?;
        Ok(stuck(&cert.coloring)? && got == Err(cert.defect))
    }
}
