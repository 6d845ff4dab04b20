//! Naive references shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use crown_verifier::color::{Color, ColorSet};
use crown_verifier::embedding::{PlanarEmbedding, Vertex};
use crown_verifier::lists::{ListAssignment, PartialColoring};

/// Every proper L-coloring of `emb`, found by walking the whole product of
/// the lists with an odometer and testing each point. Lexicographic order.
pub fn product_colorings(emb: &PlanarEmbedding, lists: &ListAssignment) -> Vec<Vec<Color>> {
    let n = emb.vertex_count();
    let opts: Vec<Vec<Color>> = (0..n).map(|v| lists.get(v).iter().collect()).collect();
    if opts.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let edges = emb.edges();
    let mut idx = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let c: Vec<Color> = (0..n).map(|v| opts[v][idx[v]]).collect();
        if edges.iter().all(|&(u, v)| c[u] != c[v]) {
            out.push(c);
        }
        // The last vertex turns fastest, so points come out in lex order.
        let mut v = n;
        loop {
            if v == 0 {
                return out;
            }
            v -= 1;
            idx[v] += 1;
            if idx[v] < opts[v].len() {
                break;
            }
            idx[v] = 0;
        }
    }
}

pub fn agrees(c: &[Color], phi: &PartialColoring) -> bool {
    phi.pairs().iter().all(|&(v, x)| c[v] == x)
}

/// Colors at `x` over the colorings in `all` that agree with `phi`.
pub fn colors_at(all: &[Vec<Color>], phi: &PartialColoring, x: Vertex) -> ColorSet {
    all.iter().filter(|c| agrees(c, phi)).map(|c| c[x]).collect()
}

/// Random lists of sizes in `1..=max_size` from `universe` colors.
pub fn random_lists(rng: &mut impl Rng, n: usize, universe: usize, max_size: usize) -> ListAssignment {
    let colors: Vec<Color> = (0..universe as Color).collect();
    let lists = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=max_size.min(universe));
            colors.choose_multiple(rng, k).copied().collect::<ColorSet>()
        })
        .collect();
    ListAssignment::new(lists)
}

/// An on-list partial coloring of a random subset of the vertices. It may
/// be improper.
pub fn random_precoloring(rng: &mut impl Rng, lists: &ListAssignment) -> PartialColoring {
    let n = lists.len();
    let mut phi = PartialColoring::empty(n);
    for v in 0..n {
        if rng.gen_bool(0.35) {
            let opts: Vec<Color> = lists.get(v).iter().collect();
            phi.set(v, *opts.choose(rng).unwrap());
        }
    }
    phi
}

/// 2-paths `a b c` of `emb` with `a != c`.
pub fn two_paths(emb: &PlanarEmbedding) -> Vec<[Vertex; 3]> {
    let mut out = Vec::new();
    for b in 0..emb.vertex_count() {
        for &a in emb.neighbors(b) {
            for &c in emb.neighbors(b) {
                if a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}
