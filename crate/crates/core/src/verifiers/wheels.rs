//! Broken wheels and colorings of short paths on the outer cycle.

use serde::Serialize;
use serde_json::json;

use super::engine::Eng;
use super::{need_path, other_outer_neighbor, rainbow_sizes, Finding, Hyp, Pairs};
use crate::color::{Color, ColorSet};
use crate::embedding::{
    bit, is_short_separation_free, mask_iter, mask_of, outer_chords, recognize_broken_wheel, Vertex,
};
use crate::instance::Instance;
use crate::lists::{reduced_list, PartialColoring};
use crate::solver::{Budget, Timeout};

fn principal(inst: &Instance) -> [Vertex; 3] {
    [inst.path[0], inst.path[1], inst.path[2]]
}

fn pair(phi: &PartialColoring, a: Vertex, b: Vertex) -> [Color; 2] {
    [phi.get(a).unwrap(), phi.get(b).unwrap()]
}

pub(super) fn broken_wheel_hyp(inst: &Instance) -> Hyp {
    if inst.path.len() != 3 {
        return Err(format!("principal path must have 3 vertices, has {}", inst.path.len()));
    }
    if recognize_broken_wheel(&inst.emb, &inst.path).is_none() {
        return Err(format!("not a broken wheel with principal path {:?}", inst.path));
    }
    for v in 0..inst.emb.vertex_count() {
        let size = inst.lists.get(v).len();
        if v != inst.path[0] && v != inst.path[1] && size < 3 {
            return Err(format!("vertex {v} has a list of size {size} < 3"));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct WheelFacts {
    rim_edges: usize,
    singletons: usize,
    universal: Vec<Color>,
    almost_universal: Vec<Color>,
}

pub(super) fn broken_wheel(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let bw = recognize_broken_wheel(&inst.emb, &inst.path).expect("checked by the hypotheses");
    let [p, hub, end] = principal(inst);
    let rim_edges = bw.rim_edges();
    let n = inst.emb.vertex_count();
    let l = |v: Vertex| inst.lists.get(v);

    let phis = eng.colorings(&[p, hub]);
    let mut s = Vec::with_capacity(phis.len());
    for phi in &phis {
        let [a, b] = pair(phi, p, hub);
        s.push(eng.lambda([p, hub, end], [Some(a), Some(b), None], budget)?);
    }

    // Part 1: pairs of colorings of pp' with singleton Λ-sets.
    let single: Vec<usize> = (0..phis.len()).filter(|&i| s[i].len() == 1).collect();
    for (x, &i) in single.iter().enumerate() {
        for &j in &single[x + 1..] {
            let (f0, f1) = (pair(&phis[i], p, hub), pair(&phis[j], p, hub));
            let same_p = f0[0] == f1[0];
            let even = rim_edges.is_multiple_of(2);
            let violated = if same_p && s[i] == s[j] {
                (!even).then_some("1a")
            } else if same_p {
                (even || s[i] != ColorSet::singleton(f1[1]) || s[j] != ColorSet::singleton(f0[1])).then_some("1b")
            } else if s[i] == s[j] {
                (even || f0 != [f1[1], f1[0]]).then_some("1c")
            } else {
                None
            };
            if let Some(part) = violated {
                return Ok(Finding::fails(json!({
                    "part": part, "phi0": f0, "phi1": f1, "s0": s[i].to_vec(), "s1": s[j].to_vec(),
                })));
            }
        }
    }

    // Part 2: at most two bad colorings share a color on p or on p'.
    let good = |i: usize| {
        let b = pair(&phis[i], p, hub)[1];
        s[i].len() >= 2 && (n == 3 || l(end).without(b).is_subset(s[i]))
    };
    for (k, q) in [p, hub].into_iter().enumerate() {
        for c in l(q) {
            let bad: Vec<[Color; 2]> = (0..phis.len())
                .filter(|&i| pair(&phis[i], p, hub)[k] == c && !good(i))
                .map(|i| pair(&phis[i], p, hub))
                .collect();
            if bad.len() >= 3 {
                return Ok(Finding::fails(json!({ "part": "2", "q": q, "color": c, "bad": &bad[..3] })));
            }
        }
    }

    // Parts 3 and 4: universality of colors of L(p) for the reversed path.
    let rev = [end, hub, p];
    let mut universal = Vec::new();
    let mut almost_universal = Vec::new();
    if n >= 4 {
        let (u1, x) = (bw.rim[1], bw.rim[2]);
        for a in l(p) {
            let lu1 = l(u1).without(a);
            if n > 4 && !lu1.is_subset(l(x)) {
                if !eng.universal(rev, a, budget)? {
                    return Ok(Finding::fails(json!({ "part": "3", "a": a })));
                }
                universal.push(a);
            }
            if !lu1.is_subset(l(x)) {
                if !eng.almost_universal(rev, a, budget)? {
                    return Ok(Finding::fails(json!({ "part": "4", "a": a })));
                }
                almost_universal.push(a);
            }
        }
    }
    Ok(Finding::holds(WheelFacts { rim_edges, singletons: single.len(), universal, almost_universal }))
}

// ---------------------------------------------------------------------------
// Partial colorings of the path that do not extend
// ---------------------------------------------------------------------------

pub(super) fn lem44_hyp(inst: &Instance) -> Hyp {
    if inst.path.len() < 3 {
        return Err(format!("path must have at least 3 vertices, has {}", inst.path.len()));
    }
    if !inst.emb.is_outer_subpath(&inst.path) {
        return Err("path is not a subpath of the outer cycle".into());
    }
    rainbow_sizes(inst)?;
    if let Some(phi) = &inst.coloring {
        let pmask = mask_of(&inst.path);
        let ends = bit(inst.path[0]) | bit(*inst.path.last().unwrap());
        if phi.len() != inst.emb.vertex_count()
            || phi.domain_mask() & !pmask != 0
            || phi.domain_mask() & ends != ends
            || crate::lists::check_coloring(&inst.emb, &inst.lists, phi).is_err()
        {
            return Err("given coloring is not a partial L-coloring of V(P) containing both endpoints".into());
        }
    }
    Ok(())
}

/// Partial L-colorings of V(P) containing both endpoints: domains by
/// increasing mask of the added internal vertices, colorings lexicographic.
fn path_colorings(inst: &Instance, eng: &Eng) -> Vec<PartialColoring> {
    if let Some(phi) = &inst.coloring {
        return vec![phi.clone()];
    }
    let path = &inst.path;
    let inner = &path[1..path.len() - 1];
    let mut out = Vec::new();
    for sub in 0u64..(1u64 << inner.len()) {
        let mut dom = vec![path[0], *path.last().unwrap()];
        dom.extend(inner.iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, &v)| v));
        dom.sort_unstable();
        out.extend(eng.colorings(&dom));
    }
    out
}

pub(super) fn lem44(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let emb = &inst.emb;
    let pmask = mask_of(&inst.path);
    let off_path = emb.outer_mask() & !pmask;
    let chords = outer_chords(emb);
    let inner_path = pmask & !bit(inst.path[0]) & !bit(*inst.path.last().unwrap());
    let interior = emb.all_mask() & !emb.outer_mask();
    let (mut checked, mut exempt) = (0usize, 0usize);
    for phi in path_colorings(inst, eng) {
        checked += 1;
        let dom = phi.domain_mask();
        let chord = chords.iter().any(|&(u, v)| {
            (dom & bit(u) != 0 && off_path & bit(v) != 0) || (dom & bit(v) != 0 && off_path & bit(u) != 0)
        });
        let tight =
            mask_iter(interior | (inner_path & !dom)).any(|v| reduced_list(emb, &inst.lists, &phi, v).len() <= 2);
        if chord || tight {
            exempt += 1;
            continue;
        }
        if !eng.extends(&phi, budget)? {
            return Ok(Finding::fails(json!({ "coloring": phi.pairs() })));
        }
    }
    Ok(Finding::holds(json!({ "checked": checked, "exempt": exempt })))
}

// ---------------------------------------------------------------------------
// 2-paths whose chords all meet the middle vertex
// ---------------------------------------------------------------------------

pub(super) fn thm45_hyp(inst: &Instance) -> Hyp {
    need_path(inst, 3)?;
    rainbow_sizes(inst)?;
    if !is_short_separation_free(&inst.emb) {
        return Err("not short-separation-free".into());
    }
    let mid = inst.path[1];
    if let Some(&(u, v)) = outer_chords(&inst.emb).iter().find(|&&(u, v)| u != mid && v != mid) {
        return Err(format!("chord {u}-{v} avoids the middle path vertex"));
    }
    Ok(())
}

fn failing_path_colorings(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Vec<PartialColoring>, Timeout> {
    let mut dom = inst.path.clone();
    dom.sort_unstable();
    let mut out = Vec::new();
    for phi in eng.colorings(&dom) {
        if !eng.extends(&phi, budget)? {
            out.push(phi);
        }
    }
    Ok(out)
}

pub(super) fn thm45(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let [p1, p2, p3] = principal(inst);
    let bw = recognize_broken_wheel(&inst.emb, &inst.path).is_some();
    let failing = failing_path_colorings(inst, eng, budget)?;
    let shown: Vec<Pairs> = failing.iter().map(PartialColoring::pairs).collect();
    if !bw && failing.len() > 1 {
        return Ok(Finding::fails(json!({ "part": "1", "failing": &shown[..2] })));
    }
    for phi in &failing {
        for p in [p1, p3] {
            let u = other_outer_neighbor(&inst.emb, p, p2);
            if inst.lists.get(u).without(phi.get(p).unwrap()).len() != 2 {
                return Ok(Finding::fails(json!({ "part": "2", "coloring": phi.pairs(), "vertex": p, "neighbor": u })));
            }
        }
    }
    Ok(Finding::holds(json!({ "broken_wheel": bw, "failing": shown })))
}

pub(super) fn cor46(inst: &Instance, eng: &Eng, budget: &mut Budget) -> Result<Finding, Timeout> {
    let p = principal(inst);
    let [p1, p2, p3] = p;
    let emb = &inst.emb;
    let l = |v: Vertex| inst.lists.get(v);
    let wheel = recognize_broken_wheel(emb, &inst.path);
    let bw = wheel.is_some();
    let k = emb.outer_cycle().len();

    let part1 = k > 4 && l(p3).len() >= 2;
    let mut universal = Vec::new();
    if part1 {
        let y = other_outer_neighbor(emb, p3, p2);
        let x = other_outer_neighbor(emb, y, p3);
        for a in l(p3) {
            if eng.universal(p, a, budget)? {
                universal.push(a);
            }
        }
        if universal.is_empty() && !(bw && l(p3).is_subset(l(x).intersection(l(y)))) {
            return Ok(Finding::fails(json!({ "part": "1", "x": x, "y": y })));
        }
    }

    let part2 = l(p3).len() >= 3 && (k > 3 || emb.vertex_count() == k);
    if part2 {
        let mut singles: Vec<(Color, Color)> = Vec::new();
        for phi in eng.colorings(&[p1, p2]) {
            let (a, b) = (phi.get(p1).unwrap(), phi.get(p2).unwrap());
            let s = eng.lambda(p, [Some(a), Some(b), None], budget)?;
            if s.len() <= 1 && !bw {
                return Ok(Finding::fails(json!({ "part": "2i", "phi": [a, b], "lambda": s.to_vec() })));
            }
            if s.len() == 1 {
                singles.push((a, b));
            }
        }
        for a in l(p1) {
            let bs: Vec<Color> = singles.iter().filter(|s| s.0 == a).map(|s| s.1).collect();
            if bs.len() > 2 {
                return Ok(Finding::fails(json!({ "part": "2ii", "a": a, "b": bs })));
            }
        }
    }

    let mut blocked = Vec::new();
    let failing = failing_path_colorings(inst, eng, budget)?;
    for phi in eng.colorings(&[p1, p3]) {
        let (a, c) = (phi.get(p1).unwrap(), phi.get(p3).unwrap());
        let free = reduced_list(emb, &inst.lists, &phi, p2);
        let b = free.difference(eng.lambda(p, [Some(a), None, Some(c)], budget)?);
        if b.len() < 2 {
            continue;
        }
        let odd = wheel.as_ref().is_some_and(|w| w.rim_edges() % 2 == 1);
        if b.len() != 2 || !odd {
            return Ok(Finding::fails(json!({ "part": "3i", "phi": [a, c], "b": b.to_vec(), "broken_wheel": bw })));
        }
        for psi in &failing {
            let (x, z) = (psi.get(p1).unwrap(), psi.get(p3).unwrap());
            if !((x == z && b.contains(x)) || (x, z) == (a, c)) {
                return Ok(Finding::fails(
                    json!({ "part": "3ii", "phi": [a, c], "b": b.to_vec(), "psi": psi.pairs() }),
                ));
            }
        }
        blocked.push(json!({ "phi": [a, c], "b": b.to_vec() }));
    }
    Ok(Finding::holds(json!({
        "broken_wheel": bw,
        "part1": part1,
        "part2": part2,
        "universal": universal,
        "blocked": blocked,
    })))
}
