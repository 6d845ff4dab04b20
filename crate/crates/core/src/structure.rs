//! Λ-sets, universal colors, End sets and Crown sets.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::color::{Color, ColorSet};
use crate::embedding::{bit, mask_iter, mask_of, PlanarEmbedding, Vertex};
use crate::lists::{ListAssignment, ListError, PartialColoring};
use crate::oracle;
use crate::solver::{Budget, Colors, Ctx, SolveError, Timeout};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error(transparent)]
    Lists(#[from] ListError),
    #[error(transparent)]
    Timeout(#[from] Timeout),
    #[error("{0:?} is not a path of the embedding")]
    NotAPath(Vec<Vertex>),
    #[error("path {0:?} is not a subpath of the outer cycle")]
    NotOnOuterCycle(Vec<Vertex>),
    #[error("path needs at least 3 vertices, got {0}")]
    PathTooShort(usize),
    #[error("query must leave exactly one slot open")]
    OpenSlots,
    #[error("color {c} is not in the list of vertex {v}")]
    OffList { v: Vertex, c: Color },
}

impl From<SolveError> for StructureError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Lists(l) => StructureError::Lists(l),
            SolveError::Timeout(t) => StructureError::Timeout(t),
        }
    }
}

/// A 2-path with colors on two of its vertices and one slot open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LambdaQuery {
    pub path: [Vertex; 3],
    pub slots: [Option<Color>; 3],
}

impl LambdaQuery {
    /// `Λ(c, •, c')`.
    pub fn middle(path: [Vertex; 3], c: Color, c2: Color) -> Self {
        LambdaQuery { path, slots: [Some(c), None, Some(c2)] }
    }

    /// `Λ(c, c', •)`.
    pub fn last(path: [Vertex; 3], c: Color, c2: Color) -> Self {
        LambdaQuery { path, slots: [Some(c), Some(c2), None] }
    }

    /// `Λ(•, c, c')`.
    pub fn first(path: [Vertex; 3], c: Color, c2: Color) -> Self {
        LambdaQuery { path, slots: [None, Some(c), Some(c2)] }
    }

    pub fn open(&self) -> Option<usize> {
        let open: Vec<usize> = (0..3).filter(|&i| self.slots[i].is_none()).collect();
        (open.len() == 1).then(|| open[0])
    }
}

fn check_two_path(emb: &PlanarEmbedding, path: &[Vertex]) -> Result<(), StructureError> {
    if path.len() != 3 || emb.check_path(path).is_err() {
        return Err(StructureError::NotAPath(path.to_vec()));
    }
    Ok(())
}

/// Colors for the open slot that complete, with the two given colors, to an
/// L-coloring of G.
pub fn lambda_set(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    q: &LambdaQuery,
    budget: &mut Budget,
) -> Result<ColorSet, StructureError> {
    lists.check_len(emb)?;
    check_two_path(emb, &q.path)?;
    let open = q.open().ok_or(StructureError::OpenSlots)?;
    for i in 0..3 {
        if let Some(c) = q.slots[i] {
            if !lists.get(q.path[i]).contains(c) {
                return Err(StructureError::OffList { v: q.path[i], c });
            }
        }
    }
    Ok(lambda_raw(&Ctx::new(emb, lists), q.path, q.slots, open, budget)?)
}

pub(crate) fn lambda_raw(
    ctx: &Ctx,
    path: [Vertex; 3],
    slots: [Option<Color>; 3],
    open: usize,
    budget: &mut Budget,
) -> Result<ColorSet, Timeout> {
    let mut colors: Colors = [0; 64];
    let mut colored = 0u64;
    for i in 0..3 {
        if let Some(c) = slots[i] {
            colors[path[i]] = c;
            colored |= bit(path[i]);
        }
    }
    if !ctx.is_valid(colored, &colors) {
        return Ok(ColorSet::EMPTY);
    }
    ctx.achievable(colored, &colors, path[open], budget)
}

fn check_universal_args(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    a: Color,
) -> Result<[Vertex; 3], StructureError> {
    lists.check_len(emb)?;
    check_two_path(emb, path)?;
    if !lists.get(path[2]).contains(a) {
        return Err(StructureError::OffList { v: path[2], c: a });
    }
    Ok([path[0], path[1], path[2]])
}

/// For each `b ∈ L(p2) ∖ {a}`, `Λ(•, b, a)` as computed by the engine.
fn first_slot_sets(
    ctx: &Ctx,
    path: [Vertex; 3],
    a: Color,
    budget: &mut Budget,
) -> Result<Vec<(Color, ColorSet)>, Timeout> {
    let mut out = Vec::new();
    for b in ctx.lists[path[1]].without(a) {
        out.push((b, lambda_raw(ctx, path, [None, Some(b), Some(a)], 0, budget)?));
    }
    Ok(out)
}

/// `a ∈ L(p3)` is (G,P)-universal.
pub fn is_universal(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    a: Color,
    budget: &mut Budget,
) -> Result<bool, StructureError> {
    let p = check_universal_args(emb, lists, path, a)?;
    let ctx = Ctx::new(emb, lists);
    Ok(universal_raw(&ctx, p, a, budget)?)
}

pub(crate) fn universal_raw(ctx: &Ctx, p: [Vertex; 3], a: Color, budget: &mut Budget) -> Result<bool, Timeout> {
    let l1 = ctx.lists[p[0]];
    Ok(first_slot_sets(ctx, p, a, budget)?.into_iter().all(|(b, s)| s == l1.without(b)))
}

/// `a ∈ L(p3)` is almost (G,P)-universal.
pub fn is_almost_universal(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    a: Color,
    budget: &mut Budget,
) -> Result<bool, StructureError> {
    let p = check_universal_args(emb, lists, path, a)?;
    let ctx = Ctx::new(emb, lists);
    Ok(almost_universal_raw(&ctx, p, a, budget)?)
}

pub(crate) fn almost_universal_raw(ctx: &Ctx, p: [Vertex; 3], a: Color, budget: &mut Budget) -> Result<bool, Timeout> {
    let need = ctx.lists[p[0]].len().saturating_sub(1);
    Ok(first_slot_sets(ctx, p, a, budget)?.into_iter().all(|(_, s)| s.len() >= need))
}

fn check_long_path(emb: &PlanarEmbedding, lists: &ListAssignment, path: &[Vertex]) -> Result<(), StructureError> {
    lists.check_len(emb)?;
    if path.len() < 3 {
        return Err(StructureError::PathTooShort(path.len()));
    }
    if emb.check_path(path).is_err() {
        return Err(StructureError::NotAPath(path.to_vec()));
    }
    Ok(())
}

/// Colors every L-coloring of `domain` (ascending vertex id, then color)
/// that is proper, and passes it to `f`.
pub(crate) fn for_each_domain_coloring<B>(
    ctx: &Ctx,
    domain: u64,
    budget: &mut Budget,
    f: &mut dyn FnMut(&Colors, &mut Budget) -> Result<ControlFlow<B>, Timeout>,
) -> Result<ControlFlow<B>, Timeout> {
    let mut colors = [0; 64];
    ctx.for_each(0, &mut colors, domain, budget, f)
}

/// Visits End_L(H, P, G) in lexicographic order.
pub(crate) fn end_walk<B>(
    ctx: &Ctx,
    path: &[Vertex],
    h: u64,
    budget: &mut Budget,
    f: &mut dyn FnMut(&Colors) -> ControlFlow<B>,
) -> Result<ControlFlow<B>, Timeout> {
    let domain = bit(path[0]) | bit(*path.last().unwrap()) | h;
    let target = mask_of(path) & !domain;
    for_each_domain_coloring(ctx, domain, budget, &mut |c, budget| {
        if ctx.insufficiency(domain, c, target, budget)?.is_none() {
            Ok(f(c))
        } else {
            Ok(ControlFlow::Continue(()))
        }
    })
}

/// `End_L(H, P, G)`: the (P,G)-sufficient L-colorings of the endpoints of
/// `P` together with `h`. An empty `h` gives `End_L(P, G)`.
pub fn end_set(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    h: &[Vertex],
    budget: &mut Budget,
) -> Result<Vec<PartialColoring>, StructureError> {
    check_long_path(emb, lists, path)?;
    let ctx = Ctx::new(emb, lists);
    let domain = bit(path[0]) | bit(*path.last().unwrap()) | mask_of(h);
    let n = emb.vertex_count();
    let mut out = Vec::new();
    let _ = end_walk(&ctx, path, mask_of(h), budget, &mut |c| {
        out.push(PartialColoring::from_mask(n, domain, c));
        ControlFlow::<()>::Continue(())
    })?;
    Ok(out)
}

pub fn end_first(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    h: &[Vertex],
    budget: &mut Budget,
) -> Result<Option<PartialColoring>, StructureError> {
    check_long_path(emb, lists, path)?;
    let ctx = Ctx::new(emb, lists);
    let domain = bit(path[0]) | bit(*path.last().unwrap()) | mask_of(h);
    let flow = end_walk(&ctx, path, mask_of(h), budget, &mut |c| ControlFlow::Break(*c))?;
    Ok(match flow {
        ControlFlow::Break(c) => Some(PartialColoring::from_mask(emb.vertex_count(), domain, &c)),
        ControlFlow::Continue(()) => None,
    })
}

/// Independent check that `phi` lies in End_L(H, P, G) where H is given by
/// the domain of `phi` minus the endpoints.
pub fn recheck_end(emb: &PlanarEmbedding, lists: &ListAssignment, path: &[Vertex], phi: &PartialColoring) -> bool {
    path.len() >= 3
        && phi.len() == emb.vertex_count()
        && phi.get(path[0]).is_some()
        && phi.get(*path.last().unwrap()).is_some()
        && oracle::sufficient(emb, lists, phi, path)
}

/// The two vertices next to the ends of `path`.
pub fn terminal_neighbors(path: &[Vertex]) -> (Vertex, Vertex) {
    (path[1], path[path.len() - 2])
}

fn check_crown_args(emb: &PlanarEmbedding, lists: &ListAssignment, path: &[Vertex]) -> Result<(), StructureError> {
    check_long_path(emb, lists, path)?;
    if !emb.is_outer_subpath(path) {
        return Err(StructureError::NotOnOuterCycle(path.to_vec()));
    }
    Ok(())
}

/// Walks Crown_L(P, G): domains are the supersets of `V(P) ∖ {q, q'}` in
/// `V(C) ∖ {q, q'}`, in increasing order of the added subset's mask; within
/// a domain, colorings are lexicographic.
pub(crate) fn crown_walk<B>(
    emb: &PlanarEmbedding,
    ctx: &Ctx,
    path: &[Vertex],
    budget: &mut Budget,
    f: &mut dyn FnMut(u64, &Colors) -> ControlFlow<B>,
) -> Result<ControlFlow<B>, Timeout> {
    let (q, q2) = terminal_neighbors(path);
    let qs = bit(q) | bit(q2);
    let required = mask_of(path) & !qs;
    let optional: Vec<Vertex> = mask_iter(emb.outer_mask() & !mask_of(path)).collect();
    let mut colors: Colors = [0; 64];
    for sub in 0u64..(1u64 << optional.len()) {
        let mut domain = required;
        for (i, &v) in optional.iter().enumerate() {
            if sub >> i & 1 == 1 {
                domain |= bit(v);
            }
        }
        let order: Vec<Vertex> = mask_iter(domain).collect();
        let flow = crown_dfs(ctx, &order, 0, domain, qs, [q, q2], [ColorSet::EMPTY; 2], &mut colors, budget, f)?;
        if flow.is_break() {
            return Ok(flow);
        }
    }
    Ok(ControlFlow::Continue(()))
}

#[allow(clippy::too_many_arguments)]
fn crown_dfs<B>(
    ctx: &Ctx,
    order: &[Vertex],
    i: usize,
    domain: u64,
    qs: u64,
    q: [Vertex; 2],
    blocked: [ColorSet; 2],
    colors: &mut Colors,
    budget: &mut Budget,
    f: &mut dyn FnMut(u64, &Colors) -> ControlFlow<B>,
) -> Result<ControlFlow<B>, Timeout> {
    budget.tick()?;
    if i == order.len() {
        if ctx.insufficiency(domain, colors, qs, budget)?.is_none() {
            return Ok(f(domain, colors));
        }
        return Ok(ControlFlow::Continue(()));
    }
    let v = order[i];
    let done = mask_of(&order[..i]);
    for c in ColorSet::from_bits(ctx.available(v, done, colors)) {
        let mut b = blocked;
        for k in 0..2 {
            if ctx.adj[v] & bit(q[k]) != 0 && ctx.lists[q[k]].contains(c) {
                b[k].insert(c);
            }
        }
        if b[0].len() > 2 || b[1].len() > 2 {
            continue;
        }
        colors[v] = c;
        let flow = crown_dfs(ctx, order, i + 1, domain, qs, q, b, colors, budget, f)?;
        if flow.is_break() {
            return Ok(flow);
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// Every element of Crown_L(P, G), in enumeration order.
pub fn crown_set(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    budget: &mut Budget,
) -> Result<Vec<PartialColoring>, StructureError> {
    check_crown_args(emb, lists, path)?;
    let ctx = Ctx::new(emb, lists);
    let n = emb.vertex_count();
    let mut out = Vec::new();
    let _ = crown_walk(emb, &ctx, path, budget, &mut |d, c| {
        out.push(PartialColoring::from_mask(n, d, c));
        ControlFlow::<()>::Continue(())
    })?;
    Ok(out)
}

/// The first element of Crown_L(P, G), or `None` if it is empty.
pub fn crown_nonempty(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    budget: &mut Budget,
) -> Result<Option<PartialColoring>, StructureError> {
    check_crown_args(emb, lists, path)?;
    let ctx = Ctx::new(emb, lists);
    let n = emb.vertex_count();
    let flow =
        crown_walk(emb, &ctx, path, budget, &mut |d, c| ControlFlow::Break(PartialColoring::from_mask(n, d, c)))?;
    Ok(match flow {
        ControlFlow::Break(p) => Some(p),
        ControlFlow::Continue(()) => None,
    })
}

/// Why a claimed Crown element is not one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrownDefect {
    Domain,
    NotAColoring,
    Slack(Vertex),
    Insufficient,
}

/// Rechecks membership in Crown_L(P, G) from the definition, using the
/// plain backtracking oracle for sufficiency.
pub fn recheck_crown(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: &[Vertex],
    phi: &PartialColoring,
) -> Result<(), CrownDefect> {
    if path.len() < 3 || phi.len() != emb.vertex_count() || !emb.is_outer_subpath(path) {
        return Err(CrownDefect::Domain);
    }
    let (q, q2) = terminal_neighbors(path);
    let dom = phi.domain();
    let on_c = dom.iter().all(|&v| emb.outer_position(v).is_some() && v != q && v != q2);
    let covers = path.iter().all(|&v| v == q || v == q2 || phi.get(v).is_some());
    if !on_c || !covers {
        return Err(CrownDefect::Domain);
    }
    let proper = phi.pairs().iter().all(|&(v, c)| lists.get(v).contains(c))
        && emb.edges().iter().all(|&(u, v)| phi.get(u).is_none() || phi.get(u) != phi.get(v));
    if !proper {
        return Err(CrownDefect::NotAColoring);
    }
    for x in [q, q2] {
        let reduced = crate::lists::reduced_list(emb, lists, phi, x);
        if reduced.len() + 2 < lists.get(x).len() {
            return Err(CrownDefect::Slack(x));
        }
    }
    if !oracle::sufficient(emb, lists, phi, path) {
        return Err(CrownDefect::Insufficient);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{broken_wheel, cycle_graph};

    fn set(c: &[Color]) -> ColorSet {
        c.iter().copied().collect()
    }

    #[test]
    fn repeated_color_gives_empty_lambda() {
        let g = broken_wheel(3);
        let l = ListAssignment::uniform(4, ColorSet::range(3));
        let p = [0, 3, 2];
        let s = lambda_set(&g, &l, &LambdaQuery::last(p, 1, 1), &mut Budget::unlimited()).unwrap();
        assert_eq!(s, ColorSet::EMPTY);
    }

    #[test]
    fn triangle_forces_third_color() {
        let g = cycle_graph(3);
        let l = ListAssignment::uniform(3, set(&[1, 2, 3]));
        let s = lambda_set(&g, &l, &LambdaQuery::last([0, 1, 2], 1, 2), &mut Budget::unlimited()).unwrap();
        assert_eq!(s, ColorSet::singleton(3));
    }

    #[test]
    fn no_universal_color_when_ends_adjacent_and_nested() {
        let g = cycle_graph(3);
        let l = ListAssignment::from_slices(&[&[1, 2, 3], &[1, 2, 3, 4], &[1, 2]]);
        for a in [1, 2] {
            assert!(!is_universal(&g, &l, &[0, 1, 2], a, &mut Budget::unlimited()).unwrap());
        }
        assert!(matches!(
            is_universal(&g, &l, &[0, 1, 2], 7, &mut Budget::unlimited()),
            Err(StructureError::OffList { v: 2, c: 7 })
        ));
    }

    #[test]
    fn disjoint_lists_make_every_endpoint_coloring_sufficient() {
        let g = cycle_graph(4);
        let l = ListAssignment::from_slices(&[&[0, 1], &[2, 3, 4], &[5, 6], &[7, 8, 9]]);
        let e = end_set(&g, &l, &[0, 1, 2], &[], &mut Budget::unlimited()).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(colors_of(&e, 0), set(&[0, 1]));
    }

    fn colors_of(f: &[PartialColoring], x: Vertex) -> ColorSet {
        crate::lists::colors_at(f, x).unwrap()
    }

    #[test]
    fn five_cycle_crown_is_nonempty() {
        let g = cycle_graph(5);
        let l = ListAssignment::uniform(5, ColorSet::range(5));
        let path = [0, 1, 2, 3, 4];
        let first = crown_nonempty(&g, &l, &path, &mut Budget::unlimited()).unwrap().unwrap();
        assert_eq!(first.pairs(), vec![(0, 0), (2, 0), (4, 1)]);
        let all = crown_set(&g, &l, &path, &mut Budget::unlimited()).unwrap();
        assert_eq!(all[0], first);
        for phi in &all {
            assert_eq!(recheck_crown(&g, &l, &path, phi), Ok(()));
        }
    }

    #[test]
    fn tampered_crown_element_fails_recheck() {
        let g = cycle_graph(5);
        let l = ListAssignment::uniform(5, ColorSet::range(5));
        let path = [0, 1, 2, 3, 4];
        let mut phi = crown_nonempty(&g, &l, &path, &mut Budget::unlimited()).unwrap().unwrap();
        phi.set(4, 0);
        assert_eq!(recheck_crown(&g, &l, &path, &phi), Err(CrownDefect::NotAColoring));
        phi.unset(2);
        assert_eq!(recheck_crown(&g, &l, &path, &phi), Err(CrownDefect::Domain));
    }

    #[test]
    fn short_path_rejected() {
        let g = cycle_graph(4);
        let l = ListAssignment::uniform(4, ColorSet::range(3));
        assert_eq!(
            crown_nonempty(&g, &l, &[0, 1], &mut Budget::unlimited()).unwrap_err(),
            StructureError::PathTooShort(2)
        );
    }
}
