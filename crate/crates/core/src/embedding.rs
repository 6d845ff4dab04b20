//! Combinatorial plane embeddings given by rotation systems.
//!
//! Vertices are dense ids `0..n`. `rotation[v]` lists the neighbors of `v` in
//! clockwise order. Faces are traced by leaving each vertex along the neighbor
//! that comes right before the arrival neighbor in clockwise order, so the
//! outer face is walked counterclockwise and bounded faces clockwise.

use std::collections::HashMap;

use thiserror::Error;

pub type Vertex = usize;

/// Vertex sets are stored as 64-bit masks.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("embedding needs at least 3 vertices, got {0}")]
    TooSmall(usize),
    #[error("embedding has {0} vertices; at most {MAX_VERTICES} are supported")]
    TooLarge(usize),
    #[error("rotation has {got} entries but n = {n}")]
    RotationLength { n: usize, got: usize },
    #[error("vertex {v} lists neighbor {w} which is out of range")]
    NeighborOutOfRange { v: Vertex, w: Vertex },
    #[error("vertex {0} has a loop")]
    Loop(Vertex),
    #[error("vertex {v} lists neighbor {w} more than once")]
    RepeatedNeighbor { v: Vertex, w: Vertex },
    #[error("adjacency is not symmetric: {v} lists {w} but {w} does not list {v}")]
    Asymmetric { v: Vertex, w: Vertex },
    #[error("graph is not connected")]
    Disconnected,
    #[error("rotation system is not planar: V - E + F = {0}, expected 2")]
    EulerViolation(i64),
    #[error("outer face {0:?} is not a simple cycle of length at least 3")]
    OuterNotCycle(Vec<Vertex>),
    #[error("outer face {0:?} is not a face of the rotation system")]
    OuterNotFace(Vec<Vertex>),
    #[error("{0:?} is not a cycle of the graph")]
    NotACycle(Vec<Vertex>),
    #[error("{0:?} is not a path of the graph")]
    NotAPath(Vec<Vertex>),
    #[error("faces do not describe a consistent rotation at vertex {0}")]
    InconsistentFaces(Vertex),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarEmbedding {
    rotation: Vec<Vec<Vertex>>,
    adj: Vec<u64>,
    dart_offset: Vec<usize>,
    dart_face: Vec<usize>,
    faces: Vec<Vec<Vertex>>,
    outer: usize,
    edge_count: usize,
}

#[inline]
pub(crate) fn bit(v: Vertex) -> u64 {
    1u64 << v
}

pub(crate) fn mask_iter(mut m: u64) -> impl Iterator<Item = Vertex> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as Vertex;
            m &= m - 1;
            Some(v)
        }
    })
}

pub(crate) fn mask_of(vs: &[Vertex]) -> u64 {
    vs.iter().fold(0, |m, &v| m | bit(v))
}

/// Rotates a cyclic sequence so that it starts at its smallest element.
fn normalize_cycle(seq: &[Vertex]) -> Vec<Vertex> {
    let Some(pos) = seq.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i) else {
        return Vec::new();
    };
    seq[pos..].iter().chain(&seq[..pos]).copied().collect()
}

impl PlanarEmbedding {
    /// Validates a rotation system together with a designated outer face. The
    /// outer face may be given in either direction; it is stored in traced
    /// (counterclockwise) order.
    pub fn new(rotation: Vec<Vec<Vertex>>, outer_face: &[Vertex]) -> Result<Self, EmbeddingError> {
        let n = rotation.len();
        if n > MAX_VERTICES {
            return Err(EmbeddingError::TooLarge(n));
        }
        if n < 3 {
            return Err(EmbeddingError::TooSmall(n));
        }
        let mut adj = vec![0u64; n];
        for (v, nbrs) in rotation.iter().enumerate() {
            for &w in nbrs {
                if w >= n {
                    return Err(EmbeddingError::NeighborOutOfRange { v, w });
                }
                if w == v {
                    return Err(EmbeddingError::Loop(v));
                }
                if adj[v] & bit(w) != 0 {
                    return Err(EmbeddingError::RepeatedNeighbor { v, w });
                }
                adj[v] |= bit(w);
            }
        }
        for v in 0..n {
            for w in mask_iter(adj[v]) {
                if adj[w] & bit(v) == 0 {
                    return Err(EmbeddingError::Asymmetric { v, w });
                }
            }
        }
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
        if seen.count_ones() as usize != n {
            return Err(EmbeddingError::Disconnected);
        }

        let mut dart_offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for nbrs in &rotation {
            dart_offset.push(total);
            total += nbrs.len();
        }
        dart_offset.push(total);
        let edge_count = total / 2;

        let mut emb = PlanarEmbedding {
            rotation,
            adj,
            dart_offset,
            dart_face: vec![usize::MAX; total],
            faces: Vec::new(),
            outer: 0,
            edge_count,
        };
        emb.trace();

        let euler = n as i64 - edge_count as i64 + emb.faces.len() as i64;
        if euler != 2 {
            return Err(EmbeddingError::EulerViolation(euler));
        }

        let outer_vec = outer_face.to_vec();
        if outer_face.len() < 3
            || mask_of(outer_face).count_ones() as usize != outer_face.len()
            || outer_face.iter().any(|&v| v >= n)
        {
            return Err(EmbeddingError::OuterNotCycle(outer_vec));
        }
        let fwd = normalize_cycle(outer_face);
        let rev: Vec<Vertex> = outer_face.iter().rev().copied().collect();
        let rev = normalize_cycle(&rev);
        let found = emb.faces.iter().position(|f| {
            let nf = normalize_cycle(f);
            nf == fwd || nf == rev
        });
        match found {
            Some(idx) => emb.outer = idx,
            None => return Err(EmbeddingError::OuterNotFace(outer_vec)),
        }
        Ok(emb)
    }

    /// Builds an embedding from oriented facial walks (every edge traversed
    /// once in each direction, all walks in the tracing orientation).
    pub fn from_faces(n: usize, faces: &[Vec<Vertex>], outer: usize) -> Result<Self, EmbeddingError> {
        let mut succ: Vec<HashMap<Vertex, Vertex>> = vec![HashMap::new(); n];
        for face in faces {
            let k = face.len();
            for i in 0..k {
                let a = face[i];
                let v = face[(i + 1) % k];
                let b = face[(i + 2) % k];
                if v >= n || a >= n || b >= n {
                    return Err(EmbeddingError::NeighborOutOfRange { v, w: a.max(b) });
                }
                // b comes right before a in clockwise order at v.
                if succ[v].insert(b, a).is_some() {
                    return Err(EmbeddingError::InconsistentFaces(v));
                }
            }
        }
        let mut rotation = Vec::with_capacity(n);
        for (v, s) in succ.iter().enumerate() {
            let Some(&start) = s.keys().min() else {
                return Err(EmbeddingError::Disconnected);
            };
            let mut rot = vec![start];
            let mut cur = s[&start];
            while cur != start {
                if rot.len() > s.len() {
                    return Err(EmbeddingError::InconsistentFaces(v));
                }
                rot.push(cur);
                cur = *s.get(&cur).ok_or(EmbeddingError::InconsistentFaces(v))?;
            }
            if rot.len() != s.len() {
                return Err(EmbeddingError::InconsistentFaces(v));
            }
            rotation.push(rot);
        }
        let outer_face = faces.get(outer).cloned().unwrap_or_default();
        PlanarEmbedding::new(rotation, &outer_face)
    }

    fn trace(&mut self) {
        let total = self.dart_face.len();
        for start in 0..total {
            if self.dart_face[start] != usize::MAX {
                continue;
            }
            let fid = self.faces.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                self.dart_face[d] = fid;
                let (u, v) = self.dart_ends(d);
                walk.push(u);
                d = self.next_dart(u, v);
                if d == start {
                    break;
                }
            }
            self.faces.push(walk);
        }
    }

    #[inline]
    fn dart_ends(&self, d: usize) -> (Vertex, Vertex) {
        let u = match self.dart_offset.binary_search(&d) {
            Ok(mut i) => {
                // Skip isolated entries sharing the same offset.
                while self.dart_offset[i + 1] == d {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        (u, self.rotation[u][d - self.dart_offset[u]])
    }

    #[inline]
    fn dart_index(&self, u: Vertex, v: Vertex) -> usize {
        let i = self.rotation[u].iter().position(|&w| w == v).expect("dart exists");
        self.dart_offset[u] + i
    }

    /// Dart following `u -> v` on its face.
    #[inline]
    fn next_dart(&self, u: Vertex, v: Vertex) -> usize {
        let rot = &self.rotation[v];
        let d = rot.len();
        let j = rot.iter().position(|&w| w == u).expect("symmetric adjacency");
        self.dart_offset[v] + (j + d - 1) % d
    }

    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn rotation(&self) -> &[Vec<Vertex>] {
        &self.rotation
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.rotation[v]
    }

    #[inline]
    pub fn adjacency_mask(&self, v: Vertex) -> u64 {
        self.adj[v]
    }

    pub(crate) fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.adj.len() && v < 64 && self.adj[u] & bit(v) != 0
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.rotation[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.vertex_count() {
            for v in mask_iter(self.adj[u] & !((bit(u) << 1) - 1)) {
                out.push((u, v));
            }
        }
        out
    }

    pub fn faces(&self) -> &[Vec<Vertex>] {
        &self.faces
    }

    /// The outer cycle in traced order.
    pub fn outer_cycle(&self) -> &[Vertex] {
        &self.faces[self.outer]
    }

    pub fn outer_face_index(&self) -> usize {
        self.outer
    }

    pub fn outer_mask(&self) -> u64 {
        mask_of(self.outer_cycle())
    }

    pub fn all_mask(&self) -> u64 {
        if self.vertex_count() == 64 {
            u64::MAX
        } else {
            bit(self.vertex_count()) - 1
        }
    }

    pub fn interior_vertices(&self) -> Vec<Vertex> {
        mask_iter(self.all_mask() & !self.outer_mask()).collect()
    }

    /// Position of `v` on the outer cycle.
    pub fn outer_position(&self, v: Vertex) -> Option<usize> {
        self.outer_cycle().iter().position(|&w| w == v)
    }

    /// Mirror image: every rotation reversed.
    pub fn mirrored(&self) -> PlanarEmbedding {
        let rotation: Vec<Vec<Vertex>> = self.rotation.iter().map(|r| r.iter().rev().copied().collect()).collect();
        PlanarEmbedding::new(rotation, self.outer_cycle()).expect("mirror of a valid embedding")
    }

    fn check_cycle(&self, cycle: &[Vertex]) -> Result<(), EmbeddingError> {
        let k = cycle.len();
        let ok = k >= 3
            && cycle.iter().all(|&v| v < self.vertex_count())
            && mask_of(cycle).count_ones() as usize == k
            && (0..k).all(|i| self.has_edge(cycle[i], cycle[(i + 1) % k]));
        if ok {
            Ok(())
        } else {
            Err(EmbeddingError::NotACycle(cycle.to_vec()))
        }
    }

    /// Checks that `path` is a simple path of the graph (a single vertex counts).
    pub fn check_path(&self, path: &[Vertex]) -> Result<(), EmbeddingError> {
        let ok = !path.is_empty()
            && path.iter().all(|&v| v < self.vertex_count())
            && mask_of(path).count_ones() as usize == path.len()
            && path.windows(2).all(|w| self.has_edge(w[0], w[1]));
        if ok {
            Ok(())
        } else {
            Err(EmbeddingError::NotAPath(path.to_vec()))
        }
    }

    /// True when `path` runs along consecutive vertices of the outer cycle.
    pub fn is_outer_subpath(&self, path: &[Vertex]) -> bool {
        if self.check_path(path).is_err() {
            return false;
        }
        let outer = self.outer_cycle();
        let k = outer.len();
        if path.len() > k {
            return false;
        }
        let Some(start) = self.outer_position(path[0]) else {
            return false;
        };
        if path.len() == 1 {
            return true;
        }
        let fwd = (0..path.len()).all(|i| outer[(start + i) % k] == path[i]);
        let bwd = (0..path.len()).all(|i| outer[(start + k - i) % k] == path[i]);
        fwd || bwd
    }

    /// Strict interior and strict exterior vertex masks of a cycle, computed by
    /// grouping faces that touch across non-cycle edges.
    pub fn cycle_sides(&self, cycle: &[Vertex]) -> Result<(u64, u64), EmbeddingError> {
        self.check_cycle(cycle)?;
        let k = cycle.len();
        let mut pos = [usize::MAX; MAX_VERTICES];
        for (i, &v) in cycle.iter().enumerate() {
            pos[v] = i;
        }
        let on_cycle_edge = |a: Vertex, b: Vertex| {
            let (pa, pb) = (pos[a], pos[b]);
            pa != usize::MAX && pb != usize::MAX && ((pa + 1) % k == pb || (pb + 1) % k == pa)
        };
        let nf = self.faces.len();
        let mut parent: Vec<usize> = (0..nf).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for u in 0..self.vertex_count() {
            for &v in &self.rotation[u] {
                if u < v && !on_cycle_edge(u, v) {
                    let f = self.dart_face[self.dart_index(u, v)];
                    let g = self.dart_face[self.dart_index(v, u)];
                    let (rf, rg) = (find(&mut parent, f), find(&mut parent, g));
                    parent[rf] = rg;
                }
            }
        }
        let outer_root = find(&mut parent, self.outer);
        let cmask = mask_of(cycle);
        let (mut inside, mut outside) = (0u64, 0u64);
        for (fid, face) in self.faces.iter().enumerate() {
            let exterior = find(&mut parent, fid) == outer_root;
            let vs = mask_of(face) & !cmask;
            if exterior {
                outside |= vs;
            } else {
                inside |= vs;
            }
        }
        Ok((inside, outside))
    }

    /// Faces lying inside `cycle` (those not grouped with the outer face).
    fn interior_faces(&self, cycle: &[Vertex]) -> Result<Vec<bool>, EmbeddingError> {
        self.check_cycle(cycle)?;
        let k = cycle.len();
        let mut pos = [usize::MAX; MAX_VERTICES];
        for (i, &v) in cycle.iter().enumerate() {
            pos[v] = i;
        }
        let nf = self.faces.len();
        let mut seen = vec![false; nf];
        let mut stack = vec![self.outer];
        seen[self.outer] = true;
        while let Some(f) = stack.pop() {
            let face = &self.faces[f];
            let len = face.len();
            for i in 0..len {
                let (a, b) = (face[i], face[(i + 1) % len]);
                let (pa, pb) = (pos[a], pos[b]);
                let cyc = pa != usize::MAX && pb != usize::MAX && ((pa + 1) % k == pb || (pb + 1) % k == pa);
                if cyc {
                    continue;
                }
                let g = self.dart_face[self.dart_index(b, a)];
                if !seen[g] {
                    seen[g] = true;
                    stack.push(g);
                }
            }
        }
        Ok(seen.into_iter().map(|s| !s).collect())
    }
}

/// Number of faces and their walks.
pub fn trace_faces(emb: &PlanarEmbedding) -> &[Vec<Vertex>] {
    emb.faces()
}

/// Edges with both ends on `cycle` that are not edges of `cycle`.
pub fn chords_of(emb: &PlanarEmbedding, cycle: &[Vertex]) -> Result<Vec<(Vertex, Vertex)>, EmbeddingError> {
    emb.check_cycle(cycle)?;
    let k = cycle.len();
    let cmask = mask_of(cycle);
    let mut out = Vec::new();
    for (u, v) in emb.edges() {
        if cmask & bit(u) == 0 || cmask & bit(v) == 0 {
            continue;
        }
        let pu = cycle.iter().position(|&w| w == u).unwrap();
        let pv = cycle.iter().position(|&w| w == v).unwrap();
        if (pu + 1) % k != pv && (pv + 1) % k != pu {
            out.push((u, v));
        }
    }
    Ok(out)
}

/// Chords of the outer cycle.
pub fn outer_chords(emb: &PlanarEmbedding) -> Vec<(Vertex, Vertex)> {
    chords_of(emb, emb.outer_cycle()).expect("outer face is a cycle")
}

/// All cycles with 3 or 4 vertices: triangles first, each cycle once, in
/// lexicographic order of its normalized vertex sequence.
pub fn short_cycles(emb: &PlanarEmbedding) -> Vec<Vec<Vertex>> {
    let n = emb.vertex_count();
    let mut out = Vec::new();
    for a in 0..n {
        for b in mask_iter(emb.adj[a]).filter(|&b| b > a) {
            for c in mask_iter(emb.adj[b] & emb.adj[a]).filter(|&c| c > b) {
                out.push(vec![a, b, c]);
            }
        }
    }
    for a in 0..n {
        for b in mask_iter(emb.adj[a]).filter(|&b| b > a) {
            for c in mask_iter(emb.adj[b]).filter(|&c| c > a && c != b) {
                for d in mask_iter(emb.adj[c] & emb.adj[a]).filter(|&d| d > b && d != c) {
                    out.push(vec![a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Returns `None` if no cycle of length at most 4 has vertices strictly on
/// both sides, and otherwise the first such cycle.
pub fn short_separation_witness(emb: &PlanarEmbedding) -> Option<Vec<Vertex>> {
    short_cycles(emb).into_iter().find(|f| {
        let (inside, outside) = emb.cycle_sides(f).expect("enumerated cycle");
        inside != 0 && outside != 0
    })
}

pub fn is_short_separation_free(emb: &PlanarEmbedding) -> bool {
    short_separation_witness(emb).is_none()
}

/// An embedding carved out of a larger one, with the map back to parent ids.
#[derive(Clone, Debug)]
pub struct SubEmbedding {
    pub embedding: PlanarEmbedding,
    /// `to_parent[i]` is the parent id of local vertex `i`; ascending.
    pub to_parent: Vec<Vertex>,
}

impl SubEmbedding {
    pub fn local(&self, parent: Vertex) -> Option<Vertex> {
        self.to_parent.binary_search(&parent).ok()
    }
}

/// The cycle together with everything drawn inside it, with the cycle as its
/// outer face.
pub fn subgraph_bounded_by(emb: &PlanarEmbedding, cycle: &[Vertex]) -> Result<SubEmbedding, EmbeddingError> {
    let inner = emb.interior_faces(cycle)?;
    let (inside, _) = emb.cycle_sides(cycle)?;
    let keep = inside | mask_of(cycle);
    let to_parent: Vec<Vertex> = mask_iter(keep).collect();
    let mut local = [usize::MAX; MAX_VERTICES];
    for (i, &v) in to_parent.iter().enumerate() {
        local[v] = i;
    }
    let mut rotation = Vec::with_capacity(to_parent.len());
    for &u in &to_parent {
        let rot: Vec<Vertex> = emb.rotation[u]
            .iter()
            .filter(|&&v| {
                keep & bit(v) != 0
                    && (inner[emb.dart_face[emb.dart_index(u, v)]] || inner[emb.dart_face[emb.dart_index(v, u)]])
            })
            .map(|&v| local[v])
            .collect();
        rotation.push(rot);
    }
    let outer: Vec<Vertex> = cycle.iter().map(|&v| local[v]).collect();
    let embedding = PlanarEmbedding::new(rotation, &outer)?;
    Ok(SubEmbedding { embedding, to_parent })
}

/// Hub adjacent to every vertex of a rim path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrokenWheel {
    pub hub: Vertex,
    /// `q_1 .. q_n`, starting at the first vertex of the principal path.
    pub rim: Vec<Vertex>,
}

impl BrokenWheel {
    pub fn principal_path(&self) -> [Vertex; 3] {
        [self.rim[0], self.hub, *self.rim.last().unwrap()]
    }

    /// Number of edges of the rim path.
    pub fn rim_edges(&self) -> usize {
        self.rim.len() - 1
    }
}

/// Recognizes `emb` as a broken wheel whose principal path is `principal`
/// (`q_1, hub, q_n`).
pub fn recognize_broken_wheel(emb: &PlanarEmbedding, principal: &[Vertex]) -> Option<BrokenWheel> {
    let &[first, hub, last] = principal else {
        return None;
    };
    let n = emb.vertex_count();
    if emb.check_path(principal).is_err() {
        return None;
    }
    let others = emb.all_mask() & !bit(hub);
    if emb.adj[hub] != others {
        return None;
    }
    // G - hub must be the path first .. last.
    let mut rim = vec![first];
    let mut prev = usize::MAX;
    let mut cur = first;
    while cur != last {
        let nexts: Vec<Vertex> = mask_iter(emb.adj[cur] & others).filter(|&w| w != prev).collect();
        if nexts.len() != 1 {
            return None;
        }
        prev = cur;
        cur = nexts[0];
        if rim.contains(&cur) {
            return None;
        }
        rim.push(cur);
    }
    if rim.len() != n - 1 || rim.len() < 2 {
        return None;
    }
    let rim_edges: usize = rim.iter().map(|&v| (emb.adj[v] & others).count_ones() as usize).sum::<usize>() / 2;
    if rim_edges != rim.len() - 1 {
        return None;
    }
    Some(BrokenWheel { hub, rim })
}

/// Builds the broken wheel with `rim_len >= 2` rim vertices `0..rim_len` and
/// hub `rim_len`; the principal path is `(0, rim_len, rim_len - 1)`.
pub fn broken_wheel(rim_len: usize) -> PlanarEmbedding {
    assert!(rim_len >= 2);
    let hub = rim_len;
    let mut faces = Vec::new();
    for i in 0..rim_len - 1 {
        faces.push(vec![i + 1, i, hub]);
    }
    let mut outer: Vec<Vertex> = (0..rim_len).collect();
    outer.push(hub);
    faces.push(outer);
    let idx = faces.len() - 1;
    PlanarEmbedding::from_faces(rim_len + 1, &faces, idx).expect("broken wheel is plane")
}

/// Cycle `0..k` with no interior.
pub fn cycle_graph(k: usize) -> PlanarEmbedding {
    let inner: Vec<Vertex> = (0..k).rev().collect();
    let outer: Vec<Vertex> = (0..k).collect();
    PlanarEmbedding::from_faces(k, &[outer, inner], 0).expect("cycle is plane")
}

/// Wheel with rim `0..k` and hub `k`.
pub fn wheel(k: usize) -> PlanarEmbedding {
    let hub = k;
    let mut faces = vec![(0..k).collect::<Vec<_>>()];
    for i in 0..k {
        faces.push(vec![(i + 1) % k, i, hub]);
    }
    PlanarEmbedding::from_faces(k + 1, &faces, 0).expect("wheel is plane")
}

// ---------------------------------------------------------------------------
// Canonical codes
// ---------------------------------------------------------------------------

const SEP: u8 = 0xFF;

fn rotation_code(emb: &PlanarEmbedding, start: Vertex, reference: Vertex, tail: &[&[Vertex]]) -> Vec<u8> {
    let n = emb.vertex_count();
    let mut label = [u8::MAX; MAX_VERTICES];
    let mut refn = [usize::MAX; MAX_VERTICES];
    let mut order = Vec::with_capacity(n);
    label[start] = 0;
    refn[start] = reference;
    order.push(start);
    let mut code = Vec::with_capacity(2 * emb.edge_count + n + 8);
    code.push(n as u8);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        let rot = &emb.rotation[v];
        let s = rot.iter().position(|&w| w == refn[v]).unwrap_or(0);
        for i in 0..rot.len() {
            let w = rot[(s + i) % rot.len()];
            if label[w] == u8::MAX {
                label[w] = order.len() as u8;
                refn[w] = v;
                order.push(w);
            }
            code.push(label[w]);
        }
        code.push(SEP);
    }
    for seq in tail {
        code.push(SEP);
        code.extend(seq.iter().map(|&v| label[v]));
    }
    code
}

impl PlanarEmbedding {
    /// Isomorphism invariant of the embedding with its outer face, treating
    /// mirror images as equal.
    pub fn canonical_code(&self) -> Vec<u8> {
        let mut best: Option<Vec<u8>> = None;
        for emb in [self.clone(), self.mirrored()] {
            let outer = emb.outer_cycle().to_vec();
            let k = outer.len();
            for i in 0..k {
                let rotated: Vec<Vertex> = outer[i..].iter().chain(&outer[..i]).copied().collect();
                let code = rotation_code(&emb, outer[i], outer[(i + 1) % k], &[&rotated]);
                if best.as_ref().is_none_or(|b| code < *b) {
                    best = Some(code);
                }
            }
        }
        best.expect("nonempty outer face")
    }

    /// Invariant of the embedding together with a designated path. With
    /// `symmetric`, the path and its reverse are the same designation.
    pub fn rooted_code(&self, path: &[Vertex], symmetric: bool) -> Vec<u8> {
        let mut best: Option<Vec<u8>> = None;
        let rev: Vec<Vertex> = path.iter().rev().copied().collect();
        let mut dirs = vec![path.to_vec()];
        if symmetric {
            dirs.push(rev);
        }
        for emb in [self.clone(), self.mirrored()] {
            let outer = emb.outer_cycle().to_vec();
            let k = outer.len();
            for p in &dirs {
                let reference = if p.len() >= 2 {
                    p[1]
                } else {
                    let i = emb.outer_position(p[0]).unwrap_or(0);
                    outer[(i + 1) % k]
                };
                let i = outer.iter().position(|&v| v == p[0]).unwrap_or(0);
                let rotated: Vec<Vertex> = outer[i..].iter().chain(&outer[..i]).copied().collect();
                let code = rotation_code(&emb, p[0], reference, &[&rotated, p]);
                if best.as_ref().is_none_or(|b| code < *b) {
                    best = Some(code);
                }
            }
        }
        best.expect("nonempty path")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Clockwise rotations from planar coordinates (y pointing up).
    pub(crate) fn rotations_from_coords(coords: &[(f64, f64)], edges: &[(Vertex, Vertex)]) -> Vec<Vec<Vertex>> {
        let n = coords.len();
        let mut rot: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            rot[u].push(v);
            rot[v].push(u);
        }
        for (v, r) in rot.iter_mut().enumerate() {
            let (x0, y0) = coords[v];
            r.sort_by(|&a, &b| {
                let ta = (coords[a].1 - y0).atan2(coords[a].0 - x0);
                let tb = (coords[b].1 - y0).atan2(coords[b].0 - x0);
                tb.partial_cmp(&ta).unwrap()
            });
        }
        rot
    }

    fn triangle() -> PlanarEmbedding {
        PlanarEmbedding::new(vec![vec![1, 2], vec![2, 0], vec![0, 1]], &[0, 1, 2]).unwrap()
    }

    #[test]
    fn triangle_has_two_faces() {
        let t = triangle();
        assert_eq!(t.faces().len(), 2);
        assert!(t.faces().iter().all(|f| f.len() == 3));
        assert_eq!(t.edge_count(), 3);
    }

    #[test]
    fn four_cycle_faces() {
        let c = cycle_graph(4);
        assert_eq!(c.faces().len(), 2);
        assert!(c.faces().iter().all(|f| f.len() == 4));
        assert!(chords_of(&c, c.outer_cycle()).unwrap().is_empty());
    }

    #[test]
    fn asymmetric_rotation_rejected() {
        let err = PlanarEmbedding::new(vec![vec![1, 2], vec![2], vec![0, 1]], &[0, 1, 2]).unwrap_err();
        assert_eq!(err, EmbeddingError::Asymmetric { v: 0, w: 1 });
    }

    #[test]
    fn nonplanar_rotation_rejected() {
        // K4 with a twisted rotation at one vertex has genus 1.
        let rot = vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]];
        let err = PlanarEmbedding::new(rot, &[0, 1, 2]).unwrap_err();
        assert!(matches!(err, EmbeddingError::EulerViolation(_) | EmbeddingError::OuterNotFace(_)));
    }

    #[test]
    fn outer_face_must_be_a_face() {
        let w = wheel(4);
        assert!(PlanarEmbedding::new(w.rotation().to_vec(), &[0, 1, 4]).is_ok());
        let err = PlanarEmbedding::new(w.rotation().to_vec(), &[0, 1, 2, 4]).unwrap_err();
        assert!(matches!(err, EmbeddingError::OuterNotFace(_)));
    }

    #[test]
    fn coordinate_rotations_trace_outer_face_counterclockwise() {
        // Unit square with a diagonal: outer walk is counterclockwise.
        let coords = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let rot = rotations_from_coords(&coords, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let e = PlanarEmbedding::new(rot, &[0, 1, 2, 3]).unwrap();
        assert_eq!(normalize_cycle(e.outer_cycle()), vec![0, 1, 2, 3]);
        assert_eq!(e.faces().len(), 3);
    }

    #[test]
    fn wheel_hub_edges_are_not_chords() {
        let w = wheel(5);
        assert!(chords_of(&w, w.outer_cycle()).unwrap().is_empty());
        let (inside, outside) = w.cycle_sides(w.outer_cycle()).unwrap();
        assert_eq!(inside, bit(5));
        assert_eq!(outside, 0);
    }

    #[test]
    fn bounded_subgraph_of_inner_triangle() {
        let w = wheel(4);
        let sub = subgraph_bounded_by(&w, &[0, 1, 4]).unwrap();
        assert_eq!(sub.embedding.vertex_count(), 3);
        assert_eq!(sub.embedding.edge_count(), 3);
        assert_eq!(sub.to_parent, vec![0, 1, 4]);
        let whole = subgraph_bounded_by(&w, w.outer_cycle()).unwrap();
        assert_eq!(whole.embedding.canonical_code(), w.canonical_code());
    }

    #[test]
    fn broken_wheel_recognition() {
        let bw = broken_wheel(3);
        let found = recognize_broken_wheel(&bw, &[0, 3, 2]).unwrap();
        assert_eq!(found.rim, vec![0, 1, 2]);
        assert_eq!(found.hub, 3);
        let t = triangle();
        for p in [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2]] {
            let found = recognize_broken_wheel(&t, &p).unwrap();
            assert_eq!(found.rim.len(), 2);
        }
        assert!(recognize_broken_wheel(&cycle_graph(4), &[0, 1, 2]).is_none());
    }

    #[test]
    fn short_separations() {
        // Triangles 0-1-2 and 0-1-3 share the chord 0-1; vertex 4 sits
        // inside 0-1-2 while 3 lies outside it.
        let faces = vec![vec![0, 3, 1, 2], vec![1, 3, 0], vec![0, 2, 4], vec![2, 1, 4], vec![1, 0, 4]];
        let e = PlanarEmbedding::from_faces(5, &faces, 0).unwrap();
        assert_eq!(short_separation_witness(&e), Some(vec![0, 1, 2]));
        assert!(is_short_separation_free(&wheel(4)));
        assert!(is_short_separation_free(&wheel(5)));
    }

    #[test]
    fn canonical_code_ignores_relabeling_and_mirroring() {
        let w = wheel(5);
        let m = w.mirrored();
        assert_eq!(w.canonical_code(), m.canonical_code());
        // Relabel by a permutation.
        let perm = [3, 0, 4, 1, 5, 2];
        let mut rot = vec![Vec::new(); 6];
        for (v, r) in w.rotation().iter().enumerate() {
            rot[perm[v]] = r.iter().map(|&x| perm[x]).collect();
        }
        let outer: Vec<Vertex> = w.outer_cycle().iter().map(|&x| perm[x]).collect();
        let p = PlanarEmbedding::new(rot, &outer).unwrap();
        assert_eq!(p.canonical_code(), w.canonical_code());
        assert_ne!(w.canonical_code(), wheel(4).canonical_code());
    }
}
