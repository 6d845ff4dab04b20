use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use crown_verifier::embedding::{is_short_separation_free, subgraph_bounded_by, trace_faces, PlanarEmbedding, Vertex};
use crown_verifier::generator::{enumerate_embeddings, EmbeddingOptions};

fn generated(max: usize) -> Vec<PlanarEmbedding> {
    enumerate_embeddings(max, EmbeddingOptions::default()).unwrap()
}

/// Everything up to 8 vertices, built once and shared.
fn up_to_eight() -> &'static [PlanarEmbedding] {
    static ALL: OnceLock<Vec<PlanarEmbedding>> = OnceLock::new();
    ALL.get_or_init(|| generated(8))
}

fn same_embedding(a: &PlanarEmbedding, b: &PlanarEmbedding) -> bool {
    a.rotation() == b.rotation() && a.outer_cycle() == b.outer_cycle()
}

#[test]
fn face_walks_use_every_dart_once() {
    for emb in up_to_eight() {
        let total: usize = trace_faces(emb).iter().map(Vec::len).sum();
        assert_eq!(total, 2 * emb.edge_count());
        // Euler's formula for a connected plane graph.
        assert_eq!(emb.vertex_count() + emb.faces().len(), emb.edge_count() + 2);
    }
}

#[test]
fn bounding_by_the_outer_cycle_is_the_identity() {
    for emb in generated(7) {
        let sub = subgraph_bounded_by(&emb, emb.outer_cycle()).unwrap();
        assert_eq!(sub.to_parent, (0..emb.vertex_count()).collect::<Vec<_>>());
        assert!(same_embedding(&sub.embedding, &emb));
        let again = subgraph_bounded_by(&sub.embedding, sub.embedding.outer_cycle()).unwrap();
        assert!(same_embedding(&again.embedding, &sub.embedding));
    }
}

#[test]
fn bounding_is_idempotent_on_inner_cycles() {
    for emb in generated(7) {
        for face in emb.faces() {
            if face.as_slice() == emb.outer_cycle() || face.len() != HashSet::<&Vertex>::from_iter(face).len() {
                continue;
            }
            let sub = subgraph_bounded_by(&emb, face).unwrap();
            let again = subgraph_bounded_by(&sub.embedding, sub.embedding.outer_cycle()).unwrap();
            assert!(same_embedding(&again.embedding, &sub.embedding));
        }
    }
}

/// Starts at the least vertex and runs towards the smaller neighbor.
fn normalized(mut c: Vec<Vertex>) -> Vec<Vertex> {
    let start = (0..c.len()).min_by_key(|&i| c[i]).unwrap();
    c.rotate_left(start);
    if c[1] > c[c.len() - 1] {
        c[1..].reverse();
    }
    c
}

/// Cycles of length 3 or 4 found by trying every vertex sequence.
fn brute_short_cycles(emb: &PlanarEmbedding) -> HashSet<Vec<Vertex>> {
    let n = emb.vertex_count();
    let mut out = HashSet::new();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a && emb.has_edge(a, b)) {
            for c in (0..n).filter(|&c| c != a && c != b && emb.has_edge(b, c)) {
                if emb.has_edge(c, a) {
                    out.insert(normalized(vec![a, b, c]));
                }
                for d in (0..n).filter(|&d| d != a && d != b && d != c) {
                    if emb.has_edge(c, d) && emb.has_edge(d, a) {
                        out.insert(normalized(vec![a, b, c, d]));
                    }
                }
            }
        }
    }
    out
}

/// The vertices strictly on each side of `cycle`, found by flooding the face
/// adjacency with the cycle's edges removed.
fn sides(emb: &PlanarEmbedding, cycle: &[Vertex]) -> (HashSet<Vertex>, HashSet<Vertex>) {
    let k = cycle.len();
    let on_cycle: HashSet<(Vertex, Vertex)> =
        (0..k).flat_map(|i| [(cycle[i], cycle[(i + 1) % k]), (cycle[(i + 1) % k], cycle[i])]).collect();
    let faces = emb.faces();
    let edges_of =
        |f: &Vec<Vertex>| -> Vec<(Vertex, Vertex)> { (0..f.len()).map(|i| (f[i], f[(i + 1) % f.len()])).collect() };
    let mut face_of = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for d in edges_of(f) {
            face_of.insert(d, i);
        }
    }
    let outer = emb.outer_face_index();
    let mut region = vec![usize::MAX; faces.len()];
    let mut id = 0;
    for start in 0..faces.len() {
        if region[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        region[start] = id;
        while let Some(f) = stack.pop() {
            for (u, v) in edges_of(&faces[f]) {
                if on_cycle.contains(&(u, v)) {
                    continue;
                }
                let g = face_of[&(v, u)];
                if region[g] == usize::MAX {
                    region[g] = id;
                    stack.push(g);
                }
            }
        }
        id += 1;
    }
    assert_eq!(id, 2, "a cycle splits the faces into two regions");
    let cyc: HashSet<Vertex> = cycle.iter().copied().collect();
    let mut inside = HashSet::new();
    let mut outside = HashSet::new();
    for (f, face) in faces.iter().enumerate() {
        let side = if region[f] == region[outer] { &mut outside } else { &mut inside };
        side.extend(face.iter().filter(|v| !cyc.contains(v)));
    }
    (inside, outside)
}

#[test]
fn short_cycles_match_brute_force() {
    for emb in generated(7) {
        let listed: HashSet<Vec<Vertex>> =
            crown_verifier::embedding::short_cycles(&emb).into_iter().map(normalized).collect();
        assert_eq!(listed, brute_short_cycles(&emb));
    }
}

#[test]
fn short_separation_freeness_matches_brute_force() {
    let mut free = 0;
    let all = up_to_eight();
    for emb in all {
        let brute = brute_short_cycles(emb).iter().all(|c| {
            let (i, o) = sides(emb, c);
            i.is_empty() || o.is_empty()
        });
        assert_eq!(is_short_separation_free(emb), brute, "{:?}", emb.rotation());
        free += brute as usize;
    }
    assert!(free > 0 && free < all.len());
}

#[test]
fn generated_embeddings_are_pairwise_distinct() {
    let all = up_to_eight();
    let mut codes = HashSet::new();
    for emb in all {
        assert!(codes.insert(emb.canonical_code()), "duplicate {:?}", emb.rotation());
    }
}
