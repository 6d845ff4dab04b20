//! Exact list-coloring extension by backtracking.
//!
//! Domains are color bitmasks. `extend` and `count_extensions` pick the free
//! vertex with the fewest remaining colors and try colors from lowest to
//! highest, with forward checking. `for_each_extension` walks free vertices
//! in id order so that its output is lexicographic.

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::color::{Color, ColorSet};
use crate::embedding::{bit, mask_iter, mask_of, PlanarEmbedding, Vertex};
use crate::lists::{check_coloring, ListAssignment, ListError, PartialColoring};

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("search budget exhausted")]
pub struct Timeout;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Lists(#[from] ListError),
    #[error(transparent)]
    Timeout(#[from] Timeout),
}

/// Wall-clock budget shared by every search inside one verification.
#[derive(Debug, Clone)]
pub struct Budget {
    deadline: Option<Instant>,
    ticks: u32,
}

const TICKS_PER_CLOCK_READ: u32 = 4096;

impl Budget {
    pub fn unlimited() -> Self {
        Budget { deadline: None, ticks: 0 }
    }

    pub fn with_timeout(d: Duration) -> Self {
        Budget { deadline: Some(Instant::now() + d), ticks: 0 }
    }

    pub fn from_millis(ms: Option<u64>) -> Self {
        match ms {
            Some(ms) => Budget::with_timeout(Duration::from_millis(ms)),
            None => Budget::unlimited(),
        }
    }

    #[inline]
    pub fn tick(&mut self) -> Result<(), Timeout> {
        let Some(deadline) = self.deadline else {
            return Ok(());
        };
        self.ticks += 1;
        if self.ticks >= TICKS_PER_CLOCK_READ {
            self.ticks = 0;
            if Instant::now() >= deadline {
                return Err(Timeout);
            }
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::unlimited()
    }
}

/// Raw colors indexed by vertex; meaningful only on a domain mask.
pub(crate) type Colors = [Color; 64];

/// Borrowed graph and lists for the mask-level routines.
#[derive(Clone, Copy)]
pub(crate) struct Ctx<'a> {
    pub adj: &'a [u64],
    pub lists: &'a [ColorSet],
}

impl<'a> Ctx<'a> {
    pub fn new(emb: &'a PlanarEmbedding, lists: &'a ListAssignment) -> Self {
        Ctx { adj: emb.adjacency(), lists: lists.as_slice() }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn all(&self) -> u64 {
        if self.n() == 64 {
            u64::MAX
        } else {
            (1u64 << self.n()) - 1
        }
    }

    /// Colors still available at `v` given the colored vertices.
    #[inline]
    pub fn available(&self, v: Vertex, colored: u64, colors: &Colors) -> u64 {
        let mut d = self.lists[v].bits();
        let mut m = self.adj[v] & colored;
        while m != 0 {
            let w = m.trailing_zeros() as usize;
            m &= m - 1;
            d &= !(1u64 << colors[w]);
        }
        d
    }

    /// Domains of the vertices in `free`; `None` if one of them is empty.
    fn domains(&self, free: u64, colored: u64, colors: &Colors) -> Option<[u64; 64]> {
        let mut dom = [0u64; 64];
        for v in mask_iter(free) {
            dom[v] = self.available(v, colored, colors);
            if dom[v] == 0 {
                return None;
            }
        }
        Some(dom)
    }

    /// Whether the coloring on `colored` extends to `colored | free`.
    /// On success the extension is written into `colors`.
    pub fn extend(&self, colored: u64, colors: &mut Colors, free: u64, budget: &mut Budget) -> Result<bool, Timeout> {
        let free = free & !colored;
        let Some(mut dom) = self.domains(free, colored, colors) else {
            return Ok(false);
        };
        // Peel vertices with more colors than free neighbors; they can be
        // colored greedily once everything else is.
        let mut core = free;
        let mut peeled = [0usize; 64];
        let mut npeeled = 0;
        loop {
            let mut changed = false;
            for v in mask_iter(core) {
                if dom[v].count_ones() > (self.adj[v] & core).count_ones() {
                    core &= !bit(v);
                    peeled[npeeled] = v;
                    npeeled += 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !mrv_search(self.adj, core, &mut dom, colors, budget)? {
            return Ok(false);
        }
        let mut done = colored | core;
        for &v in peeled[..npeeled].iter().rev() {
            let d = self.available(v, done, colors);
            debug_assert!(d != 0);
            colors[v] = d.trailing_zeros() as Color;
            done |= bit(v);
        }
        Ok(true)
    }

    pub fn count(&self, colored: u64, colors: &Colors, free: u64, budget: &mut Budget) -> Result<u64, Timeout> {
        let free = free & !colored;
        let Some(mut dom) = self.domains(free, colored, colors) else {
            return Ok(0);
        };
        mrv_count(self.adj, free, &mut dom, budget)
    }

    /// Visits every extension of the coloring on `colored` to
    /// `colored | free`, in lexicographic order by vertex id then color.
    pub fn for_each<B>(
        &self,
        colored: u64,
        colors: &mut Colors,
        free: u64,
        budget: &mut Budget,
        f: &mut dyn FnMut(&Colors, &mut Budget) -> Result<ControlFlow<B>, Timeout>,
    ) -> Result<ControlFlow<B>, Timeout> {
        let free = free & !colored;
        let Some(mut dom) = self.domains(free, colored, colors) else {
            return Ok(ControlFlow::Continue(()));
        };
        ordered_walk(self.adj, free, &mut dom, colors, budget, f)
    }

    /// First extension of the coloring on `colored` to `colored | target`
    /// that does not extend to all vertices, if any.
    pub fn insufficiency(
        &self,
        colored: u64,
        colors: &Colors,
        target: u64,
        budget: &mut Budget,
    ) -> Result<Option<Colors>, Timeout> {
        let rest = self.all() & !(colored | target);
        let mut scratch = *colors;
        let flow = self.for_each(colored, &mut scratch, target, budget, &mut |c, budget| {
            let mut full = *c;
            if self.extend(colored | target, &mut full, rest, budget)? {
                Ok(ControlFlow::Continue(()))
            } else {
                Ok(ControlFlow::Break(*c))
            }
        })?;
        Ok(match flow {
            ControlFlow::Break(c) => Some(c),
            ControlFlow::Continue(()) => None,
        })
    }

    /// Colors on `x` used by some extension of `colored` to every vertex.
    pub fn achievable(
        &self,
        colored: u64,
        colors: &Colors,
        x: Vertex,
        budget: &mut Budget,
    ) -> Result<ColorSet, Timeout> {
        if colored & bit(x) != 0 {
            return Ok(ColorSet::singleton(colors[x]));
        }
        let rest = self.all() & !colored & !bit(x);
        let mut out = ColorSet::EMPTY;
        for c in ColorSet::from_bits(self.available(x, colored, colors)) {
            let mut full = *colors;
            full[x] = c;
            if self.extend(colored | bit(x), &mut full, rest, budget)? {
                out.insert(c);
            }
        }
        Ok(out)
    }

    /// Whether the coloring on `mask` is proper and on-list.
    pub fn is_valid(&self, mask: u64, colors: &Colors) -> bool {
        mask_iter(mask)
            .all(|v| self.lists[v].contains(colors[v]) && mask_iter(self.adj[v] & mask).all(|w| colors[w] != colors[v]))
    }
}

fn mrv_pick(free: u64, dom: &[u64; 64]) -> (Vertex, u32) {
    let mut best = usize::MAX;
    let mut best_k = u32::MAX;
    for v in mask_iter(free) {
        let k = dom[v].count_ones();
        if k < best_k {
            best = v;
            best_k = k;
            if k <= 1 {
                break;
            }
        }
    }
    (best, best_k)
}

/// Removes color bit `cb` from the free neighbors `nb`; returns the vertices
/// changed, or `None` (after undoing) if some domain became empty.
#[inline]
fn prune(dom: &mut [u64; 64], nb: u64, cb: u64) -> Option<u64> {
    let mut changed = 0u64;
    for w in mask_iter(nb) {
        if dom[w] & cb != 0 {
            dom[w] &= !cb;
            changed |= bit(w);
            if dom[w] == 0 {
                restore(dom, changed, cb);
                return None;
            }
        }
    }
    Some(changed)
}

#[inline]
fn restore(dom: &mut [u64; 64], changed: u64, cb: u64) {
    for w in mask_iter(changed) {
        dom[w] |= cb;
    }
}

fn mrv_search(
    adj: &[u64],
    free: u64,
    dom: &mut [u64; 64],
    out: &mut Colors,
    budget: &mut Budget,
) -> Result<bool, Timeout> {
    budget.tick()?;
    if free == 0 {
        return Ok(true);
    }
    let (v, k) = mrv_pick(free, dom);
    if k == 0 {
        return Ok(false);
    }
    let rest = free & !bit(v);
    let nb = adj[v] & rest;
    for c in ColorSet::from_bits(dom[v]) {
        let cb = 1u64 << c;
        let Some(changed) = prune(dom, nb, cb) else {
            continue;
        };
        out[v] = c;
        let found = mrv_search(adj, rest, dom, out, budget)?;
        restore(dom, changed, cb);
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

fn mrv_count(adj: &[u64], free: u64, dom: &mut [u64; 64], budget: &mut Budget) -> Result<u64, Timeout> {
    budget.tick()?;
    if free == 0 {
        return Ok(1);
    }
    let (v, k) = mrv_pick(free, dom);
    if k == 0 {
        return Ok(0);
    }
    let rest = free & !bit(v);
    let nb = adj[v] & rest;
    if nb == 0 {
        return Ok(k as u64 * mrv_count(adj, rest, dom, budget)?);
    }
    let mut total = 0;
    for c in ColorSet::from_bits(dom[v]) {
        let cb = 1u64 << c;
        let Some(changed) = prune(dom, nb, cb) else {
            continue;
        };
        total += mrv_count(adj, rest, dom, budget)?;
        restore(dom, changed, cb);
    }
    Ok(total)
}

fn ordered_walk<B>(
    adj: &[u64],
    free: u64,
    dom: &mut [u64; 64],
    out: &mut Colors,
    budget: &mut Budget,
    f: &mut dyn FnMut(&Colors, &mut Budget) -> Result<ControlFlow<B>, Timeout>,
) -> Result<ControlFlow<B>, Timeout> {
    budget.tick()?;
    if free == 0 {
        return f(out, budget);
    }
    let v = free.trailing_zeros() as usize;
    let rest = free & !bit(v);
    let nb = adj[v] & rest;
    for c in ColorSet::from_bits(dom[v]) {
        let cb = 1u64 << c;
        let Some(changed) = prune(dom, nb, cb) else {
            continue;
        };
        out[v] = c;
        let flow = ordered_walk(adj, rest, dom, out, budget, f)?;
        restore(dom, changed, cb);
        if flow.is_break() {
            return Ok(flow);
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// A full L-coloring agreeing with `phi`, or `None` if there is none.
pub fn extend(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    budget: &mut Budget,
) -> Result<Option<Vec<Color>>, SolveError> {
    check_coloring(emb, lists, phi)?;
    let ctx = Ctx::new(emb, lists);
    let (dom, mut colors) = phi.packed();
    if ctx.extend(dom, &mut colors, ctx.all(), budget)? {
        Ok(Some(colors[..emb.vertex_count()].to_vec()))
    } else {
        Ok(None)
    }
}

/// Calls `f` on every full extension of `phi`, lexicographically by vertex
/// id then color, until it breaks.
pub fn for_each_extension(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    budget: &mut Budget,
    mut f: impl FnMut(&[Color]) -> ControlFlow<()>,
) -> Result<(), SolveError> {
    check_coloring(emb, lists, phi)?;
    let ctx = Ctx::new(emb, lists);
    let n = emb.vertex_count();
    let (dom, mut colors) = phi.packed();
    let _ = ctx.for_each(dom, &mut colors, ctx.all(), budget, &mut |c, _| Ok(f(&c[..n])))?;
    Ok(())
}

/// At most `limit` extensions of `phi`, in lexicographic order.
pub fn enumerate_extensions(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    limit: Option<usize>,
    budget: &mut Budget,
) -> Result<Vec<Vec<Color>>, SolveError> {
    let mut out = Vec::new();
    if limit == Some(0) {
        return Ok(out);
    }
    for_each_extension(emb, lists, phi, budget, |c| {
        out.push(c.to_vec());
        if Some(out.len()) == limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(out)
}

pub fn count_extensions(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    budget: &mut Budget,
) -> Result<u64, SolveError> {
    check_coloring(emb, lists, phi)?;
    let ctx = Ctx::new(emb, lists);
    let (dom, colors) = phi.packed();
    Ok(ctx.count(dom, &colors, ctx.all(), budget)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sufficiency {
    Sufficient,
    /// An extension of `phi` over `H` that does not extend to the whole graph.
    Fails(PartialColoring),
}

impl Sufficiency {
    pub fn holds(&self) -> bool {
        matches!(self, Sufficiency::Sufficient)
    }
}

/// Whether every L-coloring of `dom(phi) ∪ H` agreeing with `phi` extends
/// to all of G.
pub fn is_sufficient(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    h: &[Vertex],
    budget: &mut Budget,
) -> Result<Sufficiency, SolveError> {
    check_coloring(emb, lists, phi)?;
    if let Some(&v) = h.iter().find(|&&v| v >= emb.vertex_count()) {
        return Err(ListError::VertexOutOfRange(v).into());
    }
    let ctx = Ctx::new(emb, lists);
    let (dom, colors) = phi.packed();
    let target = mask_of(h) & !dom;
    Ok(match ctx.insufficiency(dom, &colors, target, budget)? {
        None => Sufficiency::Sufficient,
        Some(c) => Sufficiency::Fails(PartialColoring::from_mask(emb.vertex_count(), dom | target, &c)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{cycle_graph, wheel};
    use crate::lists::is_proper;

    fn edge() -> PlanarEmbedding {
        // A single edge is not accepted as an embedding, so use a triangle
        // with a free third vertex when a bare edge is wanted.
        cycle_graph(3)
    }

    #[test]
    fn empty_coloring_extends() {
        let g = edge();
        let l = ListAssignment::uniform(3, [1, 2, 3].into_iter().collect());
        let c = extend(&g, &l, &PartialColoring::empty(3), &mut Budget::unlimited()).unwrap().unwrap();
        assert!(is_proper(&PartialColoring::full(&c), &g));
    }

    #[test]
    fn triangle_has_six_colorings() {
        let g = cycle_graph(3);
        let l = ListAssignment::uniform(3, [1, 2, 3].into_iter().collect());
        let all = enumerate_extensions(&g, &l, &PartialColoring::empty(3), None, &mut Budget::unlimited()).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![1, 2, 3]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(count_extensions(&g, &l, &PartialColoring::empty(3), &mut Budget::unlimited()).unwrap(), 6);
        let two = enumerate_extensions(&g, &l, &PartialColoring::empty(3), Some(2), &mut Budget::unlimited()).unwrap();
        assert_eq!(two, all[..2]);
    }

    #[test]
    fn equal_singletons_on_an_edge() {
        let g = cycle_graph(3);
        let l = ListAssignment::from_slices(&[&[1], &[1], &[0, 1, 2]]);
        let none = PartialColoring::empty(3);
        assert_eq!(extend(&g, &l, &none, &mut Budget::unlimited()).unwrap(), None);
        assert_eq!(count_extensions(&g, &l, &none, &mut Budget::unlimited()).unwrap(), 0);
    }

    #[test]
    fn improper_precoloring_is_an_error() {
        let g = cycle_graph(3);
        let l = ListAssignment::uniform(3, ColorSet::range(3));
        let phi = PartialColoring::from_pairs(3, &[(0, 1), (1, 1)]);
        assert!(matches!(
            extend(&g, &l, &phi, &mut Budget::unlimited()),
            Err(SolveError::Lists(ListError::Improper { .. }))
        ));
    }

    #[test]
    fn wheel_hub_blocked_by_rainbow_rim() {
        let w = wheel(5);
        let l = ListAssignment::uniform(6, ColorSet::range(5));
        let phi = PartialColoring::from_pairs(6, &[(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]);
        assert_eq!(extend(&w, &l, &phi, &mut Budget::unlimited()).unwrap(), None);
    }

    #[test]
    fn opposite_vertices_of_a_four_cycle() {
        let g = cycle_graph(4);
        let l = ListAssignment::uniform(4, ColorSet::range(3));
        for a in 0..3 {
            for b in 0..3 {
                let phi = PartialColoring::from_pairs(4, &[(0, a), (2, b)]);
                let s = is_sufficient(&g, &l, &phi, &[1, 3], &mut Budget::unlimited()).unwrap();
                assert!(s.holds());
            }
        }
    }

    #[test]
    fn sufficiency_witness() {
        // Triangle 0,1,2 with 2's list {0,1}: coloring 0 and 1 with 0 and 1
        // leaves nothing for 2.
        let g = cycle_graph(3);
        let l = ListAssignment::from_slices(&[&[0], &[0, 1], &[0, 1]]);
        let phi = PartialColoring::from_pairs(3, &[(0, 0)]);
        match is_sufficient(&g, &l, &phi, &[1], &mut Budget::unlimited()).unwrap() {
            Sufficiency::Fails(w) => assert_eq!(w.pairs(), vec![(0, 0), (1, 1)]),
            s => panic!("{s:?}"),
        }
        let phi = PartialColoring::from_pairs(3, &[(0, 0), (1, 1), (2, 1)]);
        assert!(extend(&g, &l, &phi, &mut Budget::unlimited()).is_err());
    }

    #[test]
    fn zero_budget_times_out() {
        let w = wheel(7);
        let l = ListAssignment::uniform(8, ColorSet::range(4));
        let mut b = Budget::with_timeout(Duration::ZERO);
        let r = count_extensions(&w, &l, &PartialColoring::empty(8), &mut b);
        // A tiny search may finish before the clock is read; either way the
        // result is never a wrong count.
        match r {
            Ok(k) => {
                assert_eq!(k, count_extensions(&w, &l, &PartialColoring::empty(8), &mut Budget::unlimited()).unwrap())
            }
            Err(e) => assert_eq!(e, SolveError::Timeout(Timeout)),
        }
    }
}
