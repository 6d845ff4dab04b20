//! Plain chronological backtracking, kept separate from the solver so that
//! certificates can be rechecked by a second route.

use crate::color::Color;
use crate::embedding::{PlanarEmbedding, Vertex};
use crate::lists::{ListAssignment, PartialColoring};

fn fits(emb: &PlanarEmbedding, colors: &[Option<Color>], v: Vertex, c: Color) -> bool {
    emb.neighbors(v).iter().all(|&w| colors[w] != Some(c))
}

fn walk(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    order: &[Vertex],
    colors: &mut Vec<Option<Color>>,
    visit: &mut dyn FnMut(&[Option<Color>]) -> bool,
) -> bool {
    let Some((&v, rest)) = order.split_first() else {
        return visit(colors);
    };
    for c in lists.get(v) {
        if fits(emb, colors, v, c) {
            colors[v] = Some(c);
            if walk(emb, lists, rest, colors, visit) {
                colors[v] = None;
                return true;
            }
            colors[v] = None;
        }
    }
    false
}

fn valid(emb: &PlanarEmbedding, lists: &ListAssignment, phi: &PartialColoring) -> bool {
    phi.len() == emb.vertex_count()
        && lists.len() == emb.vertex_count()
        && phi.pairs().iter().all(|&(v, c)| lists.get(v).contains(c))
        && emb.edges().iter().all(|&(u, v)| phi.get(u).is_none() || phi.get(u) != phi.get(v))
}

/// Some full extension of `phi`, if `phi` is a proper L-coloring that has one.
pub fn extension(emb: &PlanarEmbedding, lists: &ListAssignment, phi: &PartialColoring) -> Option<Vec<Color>> {
    if !valid(emb, lists, phi) {
        return None;
    }
    let order: Vec<Vertex> = (0..emb.vertex_count()).filter(|&v| phi.get(v).is_none()).collect();
    let mut colors: Vec<Option<Color>> = (0..emb.vertex_count()).map(|v| phi.get(v)).collect();
    let mut found = None;
    walk(emb, lists, &order, &mut colors, &mut |c| {
        found = Some(c.iter().map(|x| x.unwrap()).collect());
        true
    });
    found
}

pub fn extends(emb: &PlanarEmbedding, lists: &ListAssignment, phi: &PartialColoring) -> bool {
    extension(emb, lists, phi).is_some()
}

/// Whether a full coloring is a proper L-coloring.
pub fn is_l_coloring(emb: &PlanarEmbedding, lists: &ListAssignment, colors: &[Color]) -> bool {
    colors.len() == emb.vertex_count()
        && colors.iter().enumerate().all(|(v, &c)| lists.get(v).contains(c))
        && emb.edges().iter().all(|&(u, v)| colors[u] != colors[v])
}

/// Every extension of `phi` to `dom(phi) ∪ h` that is a proper L-coloring.
pub fn extensions_over(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    h: &[Vertex],
) -> Vec<PartialColoring> {
    if !valid(emb, lists, phi) {
        return Vec::new();
    }
    let mut order: Vec<Vertex> = h.iter().copied().filter(|&v| phi.get(v).is_none()).collect();
    order.sort_unstable();
    order.dedup();
    let mut colors: Vec<Option<Color>> = (0..emb.vertex_count()).map(|v| phi.get(v)).collect();
    let mut out = Vec::new();
    walk(emb, lists, &order, &mut colors, &mut |c| {
        out.push(colors_to_partial(c));
        false
    });
    out
}

fn colors_to_partial(c: &[Option<Color>]) -> PartialColoring {
    let mut p = PartialColoring::empty(c.len());
    for (v, x) in c.iter().enumerate() {
        if let Some(x) = x {
            p.set(v, *x);
        }
    }
    p
}

/// `phi` is a proper L-coloring and every extension over `h` extends.
pub fn sufficient(emb: &PlanarEmbedding, lists: &ListAssignment, phi: &PartialColoring, h: &[Vertex]) -> bool {
    valid(emb, lists, phi) && extensions_over(emb, lists, phi, h).iter().all(|psi| extends(emb, lists, psi))
}

/// Colors at `x` used by some full extension of `phi`.
pub fn achievable(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    phi: &PartialColoring,
    x: Vertex,
) -> crate::color::ColorSet {
    let mut out = crate::color::ColorSet::EMPTY;
    if let Some(c) = phi.get(x) {
        if extends(emb, lists, phi) {
            out.insert(c);
        }
        return out;
    }
    for c in lists.get(x) {
        let mut psi = phi.clone();
        psi.set(x, c);
        if extends(emb, lists, &psi) {
            out.insert(c);
        }
    }
    out
}

/// Λ over the 2-path `path` with `slots` giving the two fixed colors.
pub fn lambda(
    emb: &PlanarEmbedding,
    lists: &ListAssignment,
    path: [Vertex; 3],
    slots: [Option<Color>; 3],
) -> crate::color::ColorSet {
    let mut phi = PartialColoring::empty(emb.vertex_count());
    let mut open = None;
    for i in 0..3 {
        match slots[i] {
            Some(c) => phi.set(path[i], c),
            None => open = Some(path[i]),
        }
    }
    match open {
        Some(x) if valid(emb, lists, &phi) => achievable(emb, lists, &phi, x),
        _ => crate::color::ColorSet::EMPTY,
    }
}

/// The first L-coloring of `domain` in lexicographic order, if any.
pub fn first_coloring(emb: &PlanarEmbedding, lists: &ListAssignment, domain: &[Vertex]) -> Option<PartialColoring> {
    let mut order = domain.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut colors = vec![None; emb.vertex_count()];
    let mut found = None;
    walk(emb, lists, &order, &mut colors, &mut |c| {
        found = Some(colors_to_partial(c));
        true
    });
    found
}
