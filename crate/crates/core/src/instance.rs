//! JSON instance documents, content fingerprints, and built-in instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::color::{Color, ColorSet, MAX_COLORS};
use crate::embedding::{EmbeddingError, PlanarEmbedding, Vertex};
use crate::lists::{ListAssignment, PartialColoring};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("\"n\" is {n} but {got} rotations were given")]
    CountMismatch { n: usize, got: usize },
    #[error("bad vertex key {0:?}")]
    BadKey(String),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("color {0} is out of range")]
    ColorOutOfRange(u64),
}

/// The on-disk form. Vertex-keyed maps use decimal string keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub n: usize,
    pub rotation: Vec<Vec<Vertex>>,
    pub outer_face: Vec<Vertex>,
    #[serde(default)]
    pub lists: BTreeMap<String, Vec<u64>>,
    #[serde(default)]
    pub path: Vec<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<BTreeMap<String, u64>>>,
}

/// An embedding with lists and the optional objects some statements need:
/// a path, a partial coloring, a vertex `x` and a family of colorings.
#[derive(Debug, Clone)]
pub struct Instance {
    pub emb: PlanarEmbedding,
    pub lists: ListAssignment,
    pub path: Vec<Vertex>,
    pub coloring: Option<PartialColoring>,
    pub x: Option<Vertex>,
    pub family: Option<Vec<PartialColoring>>,
}

fn parse_key(k: &str, n: usize) -> Result<Vertex, InstanceError> {
    let v: Vertex = k.parse().map_err(|_| InstanceError::BadKey(k.to_string()))?;
    if v >= n {
        return Err(InstanceError::VertexOutOfRange(v));
    }
    Ok(v)
}

fn parse_color(c: u64) -> Result<Color, InstanceError> {
    if c as usize >= MAX_COLORS {
        return Err(InstanceError::ColorOutOfRange(c));
    }
    Ok(c as Color)
}

fn parse_coloring(m: &BTreeMap<String, u64>, n: usize) -> Result<PartialColoring, InstanceError> {
    let mut p = PartialColoring::empty(n);
    for (k, &c) in m {
        p.set(parse_key(k, n)?, parse_color(c)?);
    }
    Ok(p)
}

fn coloring_map(p: &PartialColoring) -> BTreeMap<String, u64> {
    p.pairs().into_iter().map(|(v, c)| (v.to_string(), c as u64)).collect()
}

impl Instance {
    pub fn new(emb: PlanarEmbedding, lists: ListAssignment, path: Vec<Vertex>) -> Self {
        Instance { emb, lists, path, coloring: None, x: None, family: None }
    }

    pub fn from_doc(doc: InstanceDoc) -> Result<Self, InstanceError> {
        if doc.rotation.len() != doc.n {
            return Err(InstanceError::CountMismatch { n: doc.n, got: doc.rotation.len() });
        }
        let n = doc.n;
        let emb = PlanarEmbedding::new(doc.rotation, &doc.outer_face)?;
        let mut lists = vec![ColorSet::EMPTY; n];
        for (k, l) in &doc.lists {
            let v = parse_key(k, n)?;
            for &c in l {
                lists[v].insert(parse_color(c)?);
            }
        }
        if let Some(&v) = doc.path.iter().find(|&&v| v >= n) {
            return Err(InstanceError::VertexOutOfRange(v));
        }
        if let Some(x) = doc.x.filter(|&x| x >= n) {
            return Err(InstanceError::VertexOutOfRange(x));
        }
        let coloring = doc.coloring.as_ref().map(|m| parse_coloring(m, n)).transpose()?;
        let family = doc
            .family
            .as_ref()
            .map(|f| f.iter().map(|m| parse_coloring(m, n)).collect::<Result<Vec<_>, _>>())
            .transpose()?;
        Ok(Instance { emb, lists: ListAssignment::new(lists), path: doc.path, coloring, x: doc.x, family })
    }

    pub fn from_json(s: &str) -> Result<Self, InstanceError> {
        Instance::from_doc(serde_json::from_str(s)?)
    }

    pub fn to_doc(&self) -> InstanceDoc {
        let n = self.emb.vertex_count();
        InstanceDoc {
            n,
            rotation: self.emb.rotation().to_vec(),
            outer_face: self.emb.outer_cycle().to_vec(),
            lists: (0..n).map(|v| (v.to_string(), self.lists.get(v).iter().map(u64::from).collect())).collect(),
            path: self.path.clone(),
            coloring: self.coloring.as_ref().map(coloring_map),
            x: self.x,
            family: self.family.as_ref().map(|f| f.iter().map(coloring_map).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("instance serializes")
    }

    /// SHA-256 over a length-prefixed byte encoding of every field, in
    /// vertex order.
    pub fn fingerprint(&self) -> String {
        const NONE: u8 = 0xFF;
        let n = self.emb.vertex_count();
        let mut h = Sha256::new();
        let mut section = |tag: u8, bytes: &[u8]| {
            h.update([tag]);
            h.update((bytes.len() as u32).to_le_bytes());
            h.update(bytes);
        };
        let mut rot = Vec::with_capacity(4 * n);
        for r in self.emb.rotation() {
            rot.push(r.len() as u8);
            rot.extend(r.iter().map(|&v| v as u8));
        }
        section(b'r', &rot);
        section(b'o', &self.emb.outer_cycle().iter().map(|&v| v as u8).collect::<Vec<_>>());
        section(b'l', &(0..n).flat_map(|v| self.lists.get(v).bits().to_le_bytes()).collect::<Vec<_>>());
        section(b'p', &self.path.iter().map(|&v| v as u8).collect::<Vec<_>>());
        let dense = |p: &PartialColoring| (0..n).map(|v| p.get(v).unwrap_or(NONE)).collect::<Vec<u8>>();
        if let Some(c) = &self.coloring {
            section(b'c', &dense(c));
        }
        if let Some(x) = self.x {
            section(b'x', &[x as u8]);
        }
        if let Some(f) = &self.family {
            section(b'f', &f.iter().flat_map(dense).collect::<Vec<_>>());
        }
        hex::encode(h.finalize())
    }
}

/// Vertex and color names for the Figure 1 instance.
pub mod figure1 {
    use crate::color::Color;
    use crate::embedding::Vertex;

    pub const P0: Vertex = 0;
    pub const U1: Vertex = 1;
    pub const P1: Vertex = 2;
    pub const Q0: Vertex = 3;
    pub const Q1: Vertex = 4;
    pub const Z: Vertex = 5;

    pub const A: Color = 0;
    pub const B: Color = 1;
    pub const C: Color = 2;
    pub const D: Color = 3;
    pub const F: Color = 4;
    pub const R: Color = 5;
    pub const S: Color = 6;

    pub const NAMES: [&str; 6] = ["p0", "u1", "p1", "q0", "q1", "z"];
    pub const COLOR_NAMES: [char; 7] = ['a', 'b', 'c', 'd', 'f', 'r', 's'];
}

/// The hexagon `p0 q0 z q1 p1 u1` with chords from `u1` to `q0`, `z`, `q1`,
/// and the lists that make its Crown empty; the path is `C - u1`.
pub fn figure1_instance() -> Instance {
    use figure1::*;
    let rotation =
        vec![vec![Q0, U1], vec![P0, Q0, Z, Q1, P1], vec![Q1, U1], vec![Z, U1, P0], vec![Z, P1, U1], vec![Q1, U1, Q0]];
    let emb = PlanarEmbedding::new(rotation, &[P0, Q0, Z, Q1, P1, U1]).expect("figure 1 embedding");
    let lists = ListAssignment::from_slices(&[
        &[A],
        &[A, B, C],
        &[B, C, F],
        &[A, B, C, R, S],
        &[B, C, D, F, S],
        &[B, C, D, R, S],
    ]);
    Instance::new(emb, lists, vec![P0, Q0, Z, Q1, P1])
}

#[cfg(test)]
mod tests {
    use super::figure1::*;
    use super::*;

    #[test]
    fn figure1_shape() {
        let f = figure1_instance();
        assert_eq!(f.emb.vertex_count(), 6);
        assert_eq!(f.emb.edge_count(), 9);
        assert_eq!(f.emb.faces().len(), 5);
        let mut chords = crate::embedding::outer_chords(&f.emb);
        chords.sort();
        assert_eq!(chords, vec![(U1, Q0), (U1, Q1), (U1, Z)]);
    }

    #[test]
    fn json_roundtrip_keeps_fingerprint() {
        let f = figure1_instance();
        let g = Instance::from_json(&f.to_json()).unwrap();
        assert_eq!(f.fingerprint(), g.fingerprint());
        assert_eq!(g.lists, f.lists);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(Instance::from_json("{"), Err(InstanceError::Json(_))));
        let bad = r#"{"n":3,"rotation":[[1,2],[2,0],[0,1]],"outer_face":[0,1,2],"lists":{"7":[1]}}"#;
        assert!(matches!(Instance::from_json(bad), Err(InstanceError::VertexOutOfRange(7))));
        let asym = r#"{"n":3,"rotation":[[1,2],[2],[0,1]],"outer_face":[0,1,2]}"#;
        assert!(matches!(Instance::from_json(asym), Err(InstanceError::Embedding(_))));
    }

    #[test]
    fn fingerprint_sees_lists() {
        let f = figure1_instance();
        let mut g = f.clone();
        g.lists.set(U1, ColorSet::range(4));
        assert_ne!(f.fingerprint(), g.fingerprint());
    }

    #[test]
    fn figure1_crown_is_empty() {
        let f = figure1_instance();
        let mut b = crate::solver::Budget::unlimited();
        assert_eq!(crate::structure::crown_nonempty(&f.emb, &f.lists, &f.path, &mut b).unwrap(), None);
    }
}
