//! List assignments, partial colorings, list reduction and rainbows.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{Color, ColorSet};
use crate::embedding::{bit, mask_iter, mask_of, PlanarEmbedding, Vertex};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ListError {
    #[error("assignment covers {got} vertices, embedding has {n}")]
    WrongLength { n: usize, got: usize },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),
    #[error("vertex {v} is colored {c}, which is not in its list")]
    OffList { v: Vertex, c: Color },
    #[error("edge {u}-{v} is monochromatic (color {c})")]
    Improper { u: Vertex, v: Vertex, c: Color },
    #[error("vertex {x} is missing from the domain of a coloring in the family")]
    MissingFromDomain { x: Vertex },
}

/// `L(v)` for every vertex of the carrier embedding.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ListAssignment(Vec<ColorSet>);

impl ListAssignment {
    pub fn new(lists: Vec<ColorSet>) -> Self {
        ListAssignment(lists)
    }

    pub fn uniform(n: usize, list: ColorSet) -> Self {
        ListAssignment(vec![list; n])
    }

    pub fn from_slices(lists: &[&[Color]]) -> Self {
        ListAssignment(lists.iter().map(|l| l.iter().copied().collect()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> ColorSet {
        self.0[v]
    }

    pub fn set(&mut self, v: Vertex, list: ColorSet) {
        self.0[v] = list;
    }

    pub fn as_slice(&self) -> &[ColorSet] {
        &self.0
    }

    pub fn check_len(&self, emb: &PlanarEmbedding) -> Result<(), ListError> {
        if self.0.len() == emb.vertex_count() {
            Ok(())
        } else {
            Err(ListError::WrongLength { n: emb.vertex_count(), got: self.0.len() })
        }
    }

    /// Union of all lists.
    pub fn palette(&self) -> ColorSet {
        self.0.iter().fold(ColorSet::EMPTY, |a, &b| a.union(b))
    }
}

impl fmt::Debug for ListAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter().enumerate()).finish()
    }
}

/// A map from a vertex subset to colors. Properness is checked, not assumed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialColoring(Vec<Option<Color>>);

impl PartialColoring {
    pub fn empty(n: usize) -> Self {
        PartialColoring(vec![None; n])
    }

    pub fn from_pairs(n: usize, pairs: &[(Vertex, Color)]) -> Self {
        let mut p = PartialColoring::empty(n);
        for &(v, c) in pairs {
            p.0[v] = Some(c);
        }
        p
    }

    pub fn full(colors: &[Color]) -> Self {
        PartialColoring(colors.iter().map(|&c| Some(c)).collect())
    }

    pub(crate) fn from_mask(n: usize, mask: u64, colors: &[Color]) -> Self {
        let mut p = PartialColoring::empty(n);
        for v in mask_iter(mask) {
            p.0[v] = Some(colors[v]);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Option::is_none)
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> Option<Color> {
        self.0.get(v).copied().flatten()
    }

    pub fn set(&mut self, v: Vertex, c: Color) {
        self.0[v] = Some(c);
    }

    pub fn unset(&mut self, v: Vertex) {
        self.0[v] = None;
    }

    pub fn domain(&self) -> Vec<Vertex> {
        self.0.iter().enumerate().filter_map(|(v, c)| c.map(|_| v)).collect()
    }

    pub fn domain_mask(&self) -> u64 {
        mask_of(&self.domain())
    }

    pub fn pairs(&self) -> Vec<(Vertex, Color)> {
        self.0.iter().enumerate().filter_map(|(v, c)| c.map(|c| (v, c))).collect()
    }

    /// Colors packed into a fixed array, with the domain as a mask.
    pub(crate) fn packed(&self) -> (u64, [Color; 64]) {
        let mut colors = [0; 64];
        let mut mask = 0;
        for (v, c) in self.0.iter().enumerate() {
            if let Some(c) = c {
                colors[v] = *c;
                mask |= bit(v);
            }
        }
        (mask, colors)
    }

    /// Restriction to the vertices in `mask`.
    pub fn restrict(&self, mask: u64) -> PartialColoring {
        PartialColoring(self.0.iter().enumerate().map(|(v, c)| if mask & bit(v) != 0 { *c } else { None }).collect())
    }

    /// True when `self` and `other` agree wherever both are defined and
    /// `self` is defined everywhere `other` is.
    pub fn extends(&self, other: &PartialColoring) -> bool {
        other.0.iter().enumerate().all(|(v, c)| c.is_none() || self.get(v) == *c)
    }
}

impl fmt::Debug for PartialColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.pairs()).finish()
    }
}

/// No edge inside the domain is monochromatic.
pub fn is_proper(phi: &PartialColoring, emb: &PlanarEmbedding) -> bool {
    first_conflict(phi, emb).is_none()
}

fn first_conflict(phi: &PartialColoring, emb: &PlanarEmbedding) -> Option<(Vertex, Vertex, Color)> {
    for (u, v) in emb.edges() {
        if let (Some(a), Some(b)) = (phi.get(u), phi.get(v)) {
            if a == b {
                return Some((u, v, a));
            }
        }
    }
    None
}

/// Checks that `phi` is an L-coloring of its domain.
pub fn check_coloring(emb: &PlanarEmbedding, lists: &ListAssignment, phi: &PartialColoring) -> Result<(), ListError> {
    lists.check_len(emb)?;
    if phi.len() != emb.vertex_count() {
        return Err(ListError::WrongLength { n: emb.vertex_count(), got: phi.len() });
    }
    for (v, c) in phi.pairs() {
        if !lists.get(v).contains(c) {
            return Err(ListError::OffList { v, c });
        }
    }
    match first_conflict(phi, emb) {
        Some((u, v, c)) => Err(ListError::Improper { u, v, c }),
        None => Ok(()),
    }
}

/// Lists on `G - (dom(phi) \ S)` after reducing by a partial coloring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedAssignment {
    /// Vertices that remain.
    pub kept: u64,
    lists: Vec<ColorSet>,
}

impl ReducedAssignment {
    pub fn get(&self, v: Vertex) -> Option<ColorSet> {
        (self.kept & bit(v) != 0).then(|| self.lists[v])
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        mask_iter(self.kept).collect()
    }
}

/// Colored vertices in `keep` get their own color as a singleton list;
/// uncolored vertices lose the colors of their colored neighbors outside
/// `keep`; colored vertices outside `keep` are removed.
pub fn reduce(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    keep: &[Vertex],
) -> Result<ReducedAssignment, ListError> {
    check_coloring(emb, lists, phi)?;
    if let Some(&v) = keep.iter().find(|&&v| v >= emb.vertex_count()) {
        return Err(ListError::VertexOutOfRange(v));
    }
    let s = mask_of(keep);
    let dom = phi.domain_mask();
    let deleted = dom & !s;
    let kept = emb.all_mask() & !deleted;
    let mut out = vec![ColorSet::EMPTY; emb.vertex_count()];
    for v in mask_iter(kept) {
        out[v] = match phi.get(v) {
            Some(c) => ColorSet::singleton(c),
            None => {
                let mut l = lists.get(v);
                for w in mask_iter(emb.adjacency_mask(v) & deleted) {
                    l.remove(phi.get(w).unwrap());
                }
                l
            }
        };
    }
    Ok(ReducedAssignment { kept, lists: out })
}

/// `L_phi(v)`: the list of an uncolored vertex after deleting the colors of
/// its colored neighbors.
pub fn reduced_list(emb: &PlanarEmbedding, lists: &ListAssignment, phi: &PartialColoring, v: Vertex) -> ColorSet {
    let mut l = lists.get(v);
    for w in emb.neighbors(v) {
        if let Some(c) = phi.get(*w) {
            l.remove(c);
        }
    }
    l
}

/// Colors used on `x` across a family of partial colorings.
pub fn colors_at(family: &[PartialColoring], x: Vertex) -> Result<ColorSet, ListError> {
    let mut out = ColorSet::EMPTY;
    for phi in family {
        match phi.get(x) {
            Some(c) => out.insert(c),
            None => return Err(ListError::MissingFromDomain { x }),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RainbowError {
    #[error("path {0:?} is not a subpath of the outer cycle")]
    PathNotOnOuterCycle(Vec<Vertex>),
    #[error("path has {0} edges; a rainbow needs at least 2")]
    PathTooShort(usize),
    #[error(transparent)]
    Lists(#[from] ListError),
    #[error("list-size violations: {0:?}")]
    Sizes(Vec<SizeViolation>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeViolation {
    pub vertex: Vertex,
    pub size: usize,
    pub required: usize,
}

/// `(G, C, P, L)` with the list-size bounds checked.
#[derive(Clone, Copy, Debug)]
pub struct Rainbow<'a> {
    pub emb: &'a PlanarEmbedding,
    pub path: &'a [Vertex],
    pub lists: &'a ListAssignment,
    pub end_linked: bool,
}

impl<'a> Rainbow<'a> {
    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.path[0], *self.path.last().unwrap())
    }
}

/// Both endpoint lists nonempty with sizes summing to at least 4.
pub fn end_linked(lists: &ListAssignment, path: &[Vertex]) -> bool {
    let (a, b) = (lists.get(path[0]).len(), lists.get(*path.last().unwrap()).len());
    a > 0 && b > 0 && a + b >= 4
}

pub fn validate_rainbow<'a>(
    emb: &'a PlanarEmbedding,
    path: &'a [Vertex],
    lists: &'a ListAssignment,
) -> Result<Rainbow<'a>, RainbowError> {
    lists.check_len(emb)?;
    if !emb.is_outer_subpath(path) {
        return Err(RainbowError::PathNotOnOuterCycle(path.to_vec()));
    }
    if path.len() < 3 {
        return Err(RainbowError::PathTooShort(path.len().saturating_sub(1)));
    }
    let pmask = mask_of(path);
    let outer = emb.outer_mask();
    let mut bad = Vec::new();
    for v in 0..emb.vertex_count() {
        let required = if outer & bit(v) == 0 {
            5
        } else if pmask & bit(v) == 0 {
            3
        } else {
            0
        };
        let size = lists.get(v).len();
        if size < required {
            bad.push(SizeViolation { vertex: v, size, required });
        }
    }
    if !bad.is_empty() {
        return Err(RainbowError::Sizes(bad));
    }
    Ok(Rainbow { emb, path, lists, end_linked: end_linked(lists, path) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{cycle_graph, wheel};

    #[test]
    fn empty_coloring_leaves_lists_alone() {
        let w = wheel(4);
        let l = ListAssignment::uniform(5, ColorSet::range(5));
        let r = reduce(&w, &l, &PartialColoring::empty(5), &[]).unwrap();
        assert_eq!(r.kept, w.all_mask());
        for v in 0..5 {
            assert_eq!(r.get(v), Some(ColorSet::range(5)));
        }
    }

    #[test]
    fn keeping_the_whole_domain_only_freezes_colored_vertices() {
        let c = cycle_graph(4);
        let l = ListAssignment::uniform(4, ColorSet::range(3));
        let phi = PartialColoring::from_pairs(4, &[(0, 1), (2, 2)]);
        let r = reduce(&c, &l, &phi, &[0, 2]).unwrap();
        assert_eq!(r.kept, c.all_mask());
        assert_eq!(r.get(0), Some(ColorSet::singleton(1)));
        assert_eq!(r.get(2), Some(ColorSet::singleton(2)));
        assert_eq!(r.get(1), Some(ColorSet::range(3)));
        assert_eq!(r.get(3), Some(ColorSet::range(3)));
        let r = reduce(&c, &l, &phi, &[]).unwrap();
        assert_eq!(r.get(0), None);
        assert_eq!(r.get(1), Some(ColorSet::singleton(0)));
    }

    #[test]
    fn reduce_rejects_bad_colorings() {
        let c = cycle_graph(3);
        let l = ListAssignment::uniform(3, ColorSet::range(2));
        let off = PartialColoring::from_pairs(3, &[(0, 4)]);
        assert_eq!(reduce(&c, &l, &off, &[]).unwrap_err(), ListError::OffList { v: 0, c: 4 });
        let mono = PartialColoring::from_pairs(3, &[(0, 1), (1, 1)]);
        assert!(matches!(reduce(&c, &l, &mono, &[]).unwrap_err(), ListError::Improper { .. }));
    }

    #[test]
    fn properness() {
        let c = cycle_graph(3);
        assert!(is_proper(&PartialColoring::from_pairs(3, &[(1, 0)]), &c));
        assert!(!is_proper(&PartialColoring::from_pairs(3, &[(0, 1), (1, 1)]), &c));
    }

    #[test]
    fn color_projection() {
        assert_eq!(colors_at(&[], 0).unwrap(), ColorSet::EMPTY);
        let f = vec![PartialColoring::from_pairs(2, &[(0, 1)]), PartialColoring::from_pairs(2, &[(0, 2)])];
        assert_eq!(colors_at(&f, 0).unwrap().to_vec(), vec![1, 2]);
        assert_eq!(colors_at(&f, 1).unwrap_err(), ListError::MissingFromDomain { x: 1 });
    }

    #[test]
    fn rainbow_size_bounds() {
        let w = wheel(5);
        let mut l = ListAssignment::uniform(6, ColorSet::range(5));
        l.set(0, ColorSet::singleton(0));
        l.set(2, ColorSet::range(2));
        let r = validate_rainbow(&w, &[0, 1, 2], &l).unwrap();
        assert!(!r.end_linked);
        l.set(5, ColorSet::range(4));
        match validate_rainbow(&w, &[0, 1, 2], &l).unwrap_err() {
            RainbowError::Sizes(v) => assert_eq!(v, vec![SizeViolation { vertex: 5, size: 4, required: 5 }]),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(validate_rainbow(&w, &[0, 1], &l), Err(RainbowError::PathTooShort(1))));
        assert!(matches!(validate_rainbow(&w, &[0, 5, 2], &l), Err(RainbowError::PathNotOnOuterCycle(_))));
    }
}
