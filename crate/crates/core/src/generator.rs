//! Instance generation: plane near-triangulations with a designated outer
//! cycle, their connected spanning subgraphs that keep the outer cycle, and
//! list assignments up to renaming of colors.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::color::{ColorSet, MAX_COLORS};
use crate::embedding::{bit, is_short_separation_free, mask_iter, PlanarEmbedding, Vertex};
use crate::instance::Instance;
use crate::lists::ListAssignment;

/// Largest vertex count the exhaustive generator accepts.
pub const DEFAULT_VERTEX_CAP: usize = 9;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("max_vertices {got} exceeds the cap {cap}")]
    CapExceeded { got: usize, cap: usize },
    #[error("list size {size} at vertex {v} exceeds the universe {universe}")]
    Infeasible { v: Vertex, size: usize, universe: usize },
    #[error("universe {0} exceeds the color limit")]
    UniverseTooLarge(usize),
    #[error("no instance satisfying the constraints after {0} attempts")]
    Unsatisfiable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmbeddingOptions {
    pub triangulated_interior: bool,
    pub require_ssf: bool,
    /// Smallest vertex count to emit.
    pub min_vertices: usize,
    /// Restrict the outer cycle length, when set.
    pub outer_lengths: Option<(usize, usize)>,
}

struct TriangulationBuilder {
    n: usize,
    adj: Vec<u64>,
    triangles: Vec<[Vertex; 3]>,
    out: Vec<Vec<[Vertex; 3]>>,
}

impl TriangulationBuilder {
    fn add_edge(&mut self, a: Vertex, b: Vertex) {
        self.adj[a] |= bit(b);
        self.adj[b] |= bit(a);
    }

    fn remove_edge(&mut self, a: Vertex, b: Vertex) {
        self.adj[a] &= !bit(b);
        self.adj[b] &= !bit(a);
    }

    /// Fills the pending faces. Each face is a boundary walk with the
    /// number of vertices still to be placed strictly inside it.
    fn fill(&mut self, pending: &mut Vec<(Vec<Vertex>, usize)>, next: Vertex) {
        let Some((face, count)) = pending.pop() else {
            self.out.push(self.triangles.clone());
            return;
        };
        let l = face.len();
        if l == 3 && count == 0 {
            self.triangles.push([face[0], face[1], face[2]]);
            self.fill(pending, next);
            self.triangles.pop();
            pending.push((face, count));
            return;
        }
        let (f0, f1) = (face[0], face[1]);
        // Third vertex of the triangle on f0 f1 is a boundary vertex.
        for j in 2..l {
            let fj = face[j];
            let new_a = j > 2 && self.adj[f1] & bit(fj) == 0;
            let new_b = j < l - 1 && self.adj[f0] & bit(fj) == 0;
            if (j > 2 && !new_a) || (j < l - 1 && !new_b) {
                continue;
            }
            let left: Vec<Vertex> = face[1..=j].to_vec();
            let right: Vec<Vertex> = face[j..].iter().copied().chain([f0]).collect();
            let (lmax, rmax) = (if left.len() > 2 { count } else { 0 }, if right.len() > 2 { count } else { 0 });
            if new_a {
                self.add_edge(f1, fj);
            }
            if new_b {
                self.add_edge(f0, fj);
            }
            for c1 in 0..=lmax.min(count) {
                let c2 = count - c1;
                if c2 > rmax {
                    continue;
                }
                let before = pending.len();
                if right.len() > 2 {
                    pending.push((right.clone(), c2));
                }
                if left.len() > 2 {
                    pending.push((left.clone(), c1));
                }
                self.triangles.push([f0, f1, fj]);
                self.fill(pending, next);
                self.triangles.pop();
                pending.truncate(before);
            }
            if new_a {
                self.remove_edge(f1, fj);
            }
            if new_b {
                self.remove_edge(f0, fj);
            }
        }
        // Third vertex is a new interior vertex.
        if count > 0 && next < self.n {
            let x = next;
            self.add_edge(f0, x);
            self.add_edge(f1, x);
            let mut rest = Vec::with_capacity(l + 1);
            rest.push(f0);
            rest.push(x);
            rest.extend_from_slice(&face[1..]);
            let before = pending.len();
            pending.push((rest, count - 1));
            self.triangles.push([f0, f1, x]);
            self.fill(pending, next + 1);
            self.triangles.pop();
            pending.truncate(before);
            self.remove_edge(f0, x);
            self.remove_edge(f1, x);
        }
        pending.push((face, count));
    }
}

/// All near-triangulations with `n` vertices and outer cycle `0..k`, as
/// labeled triangle lists; isomorphic copies are not removed.
fn labeled_near_triangulations(n: usize, k: usize) -> Vec<Vec<[Vertex; 3]>> {
    let mut b = TriangulationBuilder { n, adj: vec![0; n], triangles: Vec::new(), out: Vec::new() };
    for i in 0..k {
        b.add_edge(i, (i + 1) % k);
    }
    let inner: Vec<Vertex> = std::iter::once(0).chain((1..k).rev()).collect();
    b.fill(&mut vec![(inner, n - k)], k);
    b.out
}

fn embedding_from_triangles(n: usize, k: usize, triangles: &[[Vertex; 3]]) -> PlanarEmbedding {
    let mut faces: Vec<Vec<Vertex>> = vec![(0..k).collect()];
    faces.extend(triangles.iter().map(|t| t.to_vec()));
    PlanarEmbedding::from_faces(n, &faces, 0).expect("generated triangulation is a valid embedding")
}

/// Near-triangulations on exactly `n` vertices, one per isomorphism class.
pub fn near_triangulations(n: usize) -> Vec<PlanarEmbedding> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for k in 3..=n {
        let mut batch: Vec<(Vec<u8>, PlanarEmbedding)> = Vec::new();
        for t in labeled_near_triangulations(n, k) {
            let e = embedding_from_triangles(n, k, &t);
            let code = e.canonical_code();
            if seen.insert(code.clone()) {
                batch.push((code, e));
            }
        }
        batch.sort_by(|a, b| a.0.cmp(&b.0));
        out.extend(batch.into_iter().map(|(_, e)| e));
    }
    out
}

/// Rebuilds an embedding from a rotation system with some edges removed.
pub fn delete_edges(emb: &PlanarEmbedding, removed: &[(Vertex, Vertex)]) -> Option<PlanarEmbedding> {
    let gone = |a: Vertex, b: Vertex| removed.iter().any(|&(u, v)| (u, v) == (a, b) || (v, u) == (a, b));
    let rotation: Vec<Vec<Vertex>> =
        (0..emb.vertex_count()).map(|v| emb.neighbors(v).iter().copied().filter(|&w| !gone(v, w)).collect()).collect();
    PlanarEmbedding::new(rotation, emb.outer_cycle()).ok()
}

fn connected_without(emb: &PlanarEmbedding, adj: &[u64]) -> bool {
    let all = emb.all_mask();
    let mut seen = 1u64;
    let mut frontier = 1u64;
    while frontier != 0 {
        let mut next = 0;
        for v in mask_iter(frontier) {
            next |= adj[v];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == all
}

/// Connected spanning subgraphs of `emb` that keep every outer-cycle edge,
/// one per isomorphism class.
pub fn edge_deletion_closure(emb: &PlanarEmbedding, seen: &mut HashSet<Vec<u8>>) -> Vec<PlanarEmbedding> {
    let outer = emb.outer_cycle();
    let k = outer.len();
    let is_outer_edge = |u: Vertex, v: Vertex| {
        (0..k).any(|i| {
            let (a, b) = (outer[i], outer[(i + 1) % k]);
            (a, b) == (u, v) || (b, a) == (u, v)
        })
    };
    let interior: Vec<(Vertex, Vertex)> = emb.edges().into_iter().filter(|&(u, v)| !is_outer_edge(u, v)).collect();
    let mut out = Vec::new();
    for sub in 0u64..(1u64 << interior.len()) {
        let mut adj: Vec<u64> = (0..emb.vertex_count()).map(|v| emb.adjacency_mask(v)).collect();
        let mut removed = Vec::new();
        for (i, &(u, v)) in interior.iter().enumerate() {
            if sub >> i & 1 == 1 {
                adj[u] &= !bit(v);
                adj[v] &= !bit(u);
                removed.push((u, v));
            }
        }
        if !connected_without(emb, &adj) {
            continue;
        }
        let Some(e) = delete_edges(emb, &removed) else { continue };
        if seen.insert(e.canonical_code()) {
            out.push(e);
        }
    }
    out
}

/// Plane graphs with a designated outer cycle on at most `max_vertices`
/// vertices, one per isomorphism class, ordered by vertex count and then by
/// canonical code.
pub fn enumerate_embeddings(
    max_vertices: usize,
    opts: EmbeddingOptions,
) -> Result<Vec<PlanarEmbedding>, GeneratorError> {
    enumerate_embeddings_capped(max_vertices, opts, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_embeddings_capped(
    max_vertices: usize,
    opts: EmbeddingOptions,
    cap: usize,
) -> Result<Vec<PlanarEmbedding>, GeneratorError> {
    if max_vertices > cap {
        return Err(GeneratorError::CapExceeded { got: max_vertices, cap });
    }
    let mut out = Vec::new();
    for n in opts.min_vertices.max(3)..=max_vertices {
        let tri = near_triangulations(n);
        let mut batch: Vec<(Vec<u8>, PlanarEmbedding)> = Vec::new();
        if opts.triangulated_interior {
            batch.extend(tri.into_iter().map(|e| (e.canonical_code(), e)));
        } else {
            let mut seen = HashSet::new();
            for t in &tri {
                if let Some((lo, hi)) = opts.outer_lengths {
                    let k = t.outer_cycle().len();
                    if k < lo || k > hi {
                        continue;
                    }
                }
                for e in edge_deletion_closure(t, &mut seen) {
                    batch.push((e.canonical_code(), e));
                }
            }
        }
        batch.retain(|(_, e)| {
            let k = e.outer_cycle().len();
            opts.outer_lengths.is_none_or(|(lo, hi)| lo <= k && k <= hi)
                && (!opts.require_ssf || is_short_separation_free(e))
        });
        batch.sort_by(|a, b| (a.1.outer_cycle().len(), &a.0).cmp(&(b.1.outer_cycle().len(), &b.0)));
        out.extend(batch.into_iter().map(|(_, e)| e));
    }
    Ok(out)
}

/// Calls `f` on every list assignment with `|L(v)| = sizes[v]` drawn from
/// `0..universe`, one per orbit under renaming of colors. Vertices are
/// filled in id order; at each vertex the colors split into classes of
/// colors that no earlier list tells apart, and only the lowest colors of
/// each class are taken.
pub fn for_each_list_assignment(
    sizes: &[usize],
    universe: usize,
    mut f: impl FnMut(&[ColorSet]),
) -> Result<(), GeneratorError> {
    if universe > MAX_COLORS {
        return Err(GeneratorError::UniverseTooLarge(universe));
    }
    if let Some((v, &size)) = sizes.iter().enumerate().find(|(_, &s)| s > universe) {
        return Err(GeneratorError::Infeasible { v, size, universe });
    }
    let mut lists = vec![ColorSet::EMPTY; sizes.len()];
    let classes = if universe == 0 { vec![] } else { vec![(0usize, universe)] };
    list_rec(sizes, 0, &classes, &mut lists, &mut f);
    Ok(())
}

fn list_rec(
    sizes: &[usize],
    v: usize,
    classes: &[(usize, usize)],
    lists: &mut [ColorSet],
    f: &mut dyn FnMut(&[ColorSet]),
) {
    if v == sizes.len() {
        f(lists);
        return;
    }
    let mut take = vec![0usize; classes.len()];
    distribute(sizes, v, classes, 0, sizes[v], &mut take, lists, f);
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    sizes: &[usize],
    v: usize,
    classes: &[(usize, usize)],
    i: usize,
    left: usize,
    take: &mut [usize],
    lists: &mut [ColorSet],
    f: &mut dyn FnMut(&[ColorSet]),
) {
    if i == classes.len() {
        if left != 0 {
            return;
        }
        let mut list = ColorSet::EMPTY;
        let mut next = Vec::with_capacity(classes.len() * 2);
        for (j, &(start, len)) in classes.iter().enumerate() {
            let t = take[j];
            for c in start..start + t {
                list.insert(c as u8);
            }
            if t > 0 {
                next.push((start, t));
            }
            if t < len {
                next.push((start + t, len - t));
            }
        }
        lists[v] = list;
        list_rec(sizes, v + 1, &next, lists, f);
        return;
    }
    let remaining_cap: usize = classes[i + 1..].iter().map(|c| c.1).sum();
    let (_, len) = classes[i];
    let lo = left.saturating_sub(remaining_cap);
    for t in (lo..=len.min(left)).rev() {
        take[i] = t;
        distribute(sizes, v, classes, i + 1, left - t, take, lists, f);
    }
    take[i] = 0;
}

pub fn enumerate_list_assignments(sizes: &[usize], universe: usize) -> Result<Vec<ListAssignment>, GeneratorError> {
    let mut out = Vec::new();
    for_each_list_assignment(sizes, universe, |l| out.push(ListAssignment::new(l.to_vec())))?;
    Ok(out)
}

pub fn count_list_assignments(sizes: &[usize], universe: usize) -> Result<u64, GeneratorError> {
    let mut k = 0u64;
    for_each_list_assignment(sizes, universe, |_| k += 1)?;
    Ok(k)
}

/// Parameters for drawing a random rainbow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleParams {
    pub vertices: usize,
    pub universe: usize,
    /// Number of edges of the designated path.
    pub path_edges: usize,
    pub triangulated_interior: bool,
    /// For a 4-path: its three inner vertices have no common neighbor on
    /// the rest of the outer cycle.
    pub no_common_neighbor: bool,
    /// Sizes for path endpoints, other path vertices, the rest of the
    /// outer cycle, and interior vertices.
    pub endpoint_sizes: (usize, usize),
    pub path_inner_size: usize,
    pub outer_size: usize,
    pub interior_size: usize,
}

impl SampleParams {
    pub fn holepunch(vertices: usize) -> Self {
        SampleParams {
            vertices,
            universe: 7,
            path_edges: 4,
            triangulated_interior: false,
            no_common_neighbor: true,
            endpoint_sizes: (1, 3),
            path_inner_size: 5,
            outer_size: 3,
            interior_size: 5,
        }
    }
}

const SAMPLE_ATTEMPTS: usize = 1000;

/// Whether the inner vertices of a 4-path share a neighbor on `C - P`.
pub fn inner_common_neighbor(emb: &PlanarEmbedding, path: &[Vertex]) -> Option<Vertex> {
    let rest = emb.outer_mask() & !crate::embedding::mask_of(path);
    let common = emb.adjacency_mask(path[1]) & emb.adjacency_mask(path[2]) & emb.adjacency_mask(path[3]) & rest;
    mask_iter(common).next()
}

/// A reproducible random instance: the same seed and parameters always
/// give the same instance.
pub fn sample_instance(seed: u64, params: &SampleParams) -> Result<Instance, GeneratorError> {
    if params.vertices > DEFAULT_VERTEX_CAP {
        return Err(GeneratorError::CapExceeded { got: params.vertices, cap: DEFAULT_VERTEX_CAP });
    }
    let opts = EmbeddingOptions {
        triangulated_interior: params.triangulated_interior,
        min_vertices: params.vertices,
        outer_lengths: Some((params.path_edges + 1, params.vertices)),
        ..Default::default()
    };
    let pool: Vec<PlanarEmbedding> = if params.triangulated_interior || params.vertices <= 7 {
        enumerate_embeddings(params.vertices, opts)?
    } else {
        near_triangulations(params.vertices).into_iter().filter(|e| e.outer_cycle().len() > params.path_edges).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SAMPLE_ATTEMPTS {
        let Some(base) = pool.choose(&mut rng) else { break };
        let emb = if params.triangulated_interior || params.vertices <= 7 {
            base.clone()
        } else {
            random_deletion(base, &mut rng)
        };
        let outer = emb.outer_cycle();
        let k = outer.len();
        if k <= params.path_edges {
            continue;
        }
        let start = rng.gen_range(0..k);
        let path: Vec<Vertex> = (0..=params.path_edges).map(|i| outer[(start + i) % k]).collect();
        if params.no_common_neighbor && params.path_edges == 4 && inner_common_neighbor(&emb, &path).is_some() {
            continue;
        }
        let n = emb.vertex_count();
        let mut lists = vec![ColorSet::EMPTY; n];
        let pmask = crate::embedding::mask_of(&path);
        for (v, list) in lists.iter_mut().enumerate() {
            let size = if v == path[0] {
                params.endpoint_sizes.0
            } else if v == path[params.path_edges] {
                params.endpoint_sizes.1
            } else if pmask & bit(v) != 0 {
                params.path_inner_size
            } else if emb.outer_mask() & bit(v) != 0 {
                params.outer_size
            } else {
                params.interior_size
            };
            if size > params.universe {
                return Err(GeneratorError::Infeasible { v, size, universe: params.universe });
            }
            let mut colors: Vec<u8> = (0..params.universe as u8).collect();
            colors.shuffle(&mut rng);
            *list = colors[..size].iter().copied().collect();
        }
        return Ok(Instance::new(emb, ListAssignment::new(lists), path));
    }
    Err(GeneratorError::Unsatisfiable(SAMPLE_ATTEMPTS))
}

fn random_deletion(emb: &PlanarEmbedding, rng: &mut ChaCha8Rng) -> PlanarEmbedding {
    let outer = emb.outer_cycle();
    let k = outer.len();
    let on_outer = |u: Vertex, v: Vertex| {
        (0..k).any(|i| {
            let (a, b) = (outer[i], outer[(i + 1) % k]);
            (a, b) == (u, v) || (b, a) == (u, v)
        })
    };
    let mut current = emb.clone();
    for (u, v) in emb.edges() {
        if on_outer(u, v) || !rng.gen_bool(0.3) {
            continue;
        }
        let mut adj: Vec<u64> = (0..current.vertex_count()).map(|w| current.adjacency_mask(w)).collect();
        if adj[u] & bit(v) == 0 {
            continue;
        }
        adj[u] &= !bit(v);
        adj[v] &= !bit(u);
        if connected_without(&current, &adj) {
            if let Some(e) = delete_edges(&current, &[(u, v)]) {
                current = e;
            }
        }
    }
    current
}
