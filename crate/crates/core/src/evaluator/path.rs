//! Paths, their concatenation `∘` and the concatenative join `⋈∘`.
//!
//! A path is a start vertex followed by `(edge, vertex)` steps; the empty path
//! `ε` has neither. Paths are generic over the vertex and edge types so the
//! operations can be exercised on symbolic names as well as graph ids.

use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path<V, E> {
    start: Option<V>,
    steps: Vec<(E, V)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot concatenate: path ends at {end} but the next one starts at {start}")]
pub struct PathError {
    pub end: String,
    pub start: String,
}

impl<V: Clone + PartialEq, E: Clone> Path<V, E> {
    /// `ε`
    pub fn empty() -> Self {
        Path {
            start: None,
            steps: Vec::new(),
        }
    }

    /// A zero-length path sitting on one vertex.
    pub fn vertex(v: V) -> Self {
        Path {
            start: Some(v),
            steps: Vec::new(),
        }
    }

    pub fn new(start: V, steps: Vec<(E, V)>) -> Self {
        Path {
            start: Some(start),
            steps,
        }
    }

    /// The single-edge path `(from, e, to)`.
    pub fn edge(from: V, e: E, to: V) -> Self {
        Path::new(from, vec![(e, to)])
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_none()
    }

    /// `‖p‖`, the number of edges.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// `γ⁻`
    pub fn first(&self) -> Option<&V> {
        self.start.as_ref()
    }

    /// `γ⁺`
    pub fn last(&self) -> Option<&V> {
        self.steps.last().map(|(_, v)| v).or(self.start.as_ref())
    }

    pub fn steps(&self) -> &[(E, V)] {
        &self.steps
    }

    /// Alternating sequence with shared endpoints written once:
    /// `(i,α,j) ∘ (j,β,k)` gives `i α j β k`.
    pub fn spliced(&self) -> Vec<PathItem<V, E>> {
        let mut out = Vec::with_capacity(1 + 2 * self.steps.len());
        if let Some(s) = &self.start {
            out.push(PathItem::Vertex(s.clone()));
        }
        for (e, v) in &self.steps {
            out.push(PathItem::Edge(e.clone()));
            out.push(PathItem::Vertex(v.clone()));
        }
        out
    }

    /// Edge triples written end to end, repeating each shared endpoint:
    /// `(i,α,j) ∘ (j,β,k)` gives `i α j j β k`.
    pub fn flat(&self) -> Vec<PathItem<V, E>> {
        let Some(start) = &self.start else {
            return Vec::new();
        };
        if self.steps.is_empty() {
            return vec![PathItem::Vertex(start.clone())];
        }
        let mut out = Vec::with_capacity(3 * self.steps.len());
        let mut from = start;
        for (e, v) in &self.steps {
            out.push(PathItem::Vertex(from.clone()));
            out.push(PathItem::Edge(e.clone()));
            out.push(PathItem::Vertex(v.clone()));
            from = v;
        }
        out
    }
}

impl Path<VertexId, EdgeId> {
    /// Whether every step follows an edge of `g` from the previous vertex.
    pub fn is_incident_in(&self, g: &Graph) -> bool {
        let Some(mut at) = self.start else {
            return true;
        };
        if !g.contains_vertex(at) {
            return false;
        }
        for &(e, v) in &self.steps {
            match g.edge(e) {
                Some(rec) if rec.out_v == at && rec.in_v == v => at = v,
                _ => return false,
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathItem<V, E> {
    Vertex(V),
    Edge(E),
}

impl<V: fmt::Display, E: fmt::Display> fmt::Display for PathItem<V, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathItem::Vertex(v) => v.fmt(f),
            PathItem::Edge(e) => e.fmt(f),
        }
    }
}

/// `p ∘ r`. Defined when either side is `ε` or `γ⁺(p) = γ⁻(r)`.
pub fn path_concat<V, E>(p: &Path<V, E>, r: &Path<V, E>) -> Result<Path<V, E>, PathError>
where
    V: Clone + PartialEq + fmt::Debug,
    E: Clone,
{
    let (Some(end), Some(start)) = (p.last(), r.first()) else {
        return Ok(if p.is_empty() { r.clone() } else { p.clone() });
    };
    if end != start {
        return Err(PathError {
            end: format!("{end:?}"),
            start: format!("{start:?}"),
        });
    }
    let mut steps = p.steps.clone();
    steps.extend(r.steps.iter().cloned());
    Ok(Path {
        start: p.start.clone(),
        steps,
    })
}

/// `P ⋈∘ R`: every concatenation `p ∘ r` that is defined, as a bag in
/// `P`-major order.
pub fn path_join<V, E>(left: &[Path<V, E>], right: &[Path<V, E>]) -> Vec<Path<V, E>>
where
    V: Clone + PartialEq + fmt::Debug,
    E: Clone,
{
    let mut out = Vec::new();
    for p in left {
        for r in right {
            if let Ok(joined) = path_concat(p, r) {
                out.push(joined);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Path<&'static str, &'static str>;

    fn seq(p: &P, flat: bool) -> String {
        let items = if flat { p.flat() } else { p.spliced() };
        items
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    #[test]
    fn concatenation_splices_the_shared_vertex() {
        let p: P = Path::edge("i", "α", "j");
        let r: P = Path::edge("j", "β", "k");
        let pr = path_concat(&p, &r).unwrap();
        assert_eq!(seq(&pr, false), "i,α,j,β,k");
        assert_eq!(seq(&pr, true), "i,α,j,j,β,k");
        assert_eq!(pr.len(), 2);
    }

    #[test]
    fn empty_path_is_identity() {
        let p: P = Path::edge("i", "α", "j");
        assert_eq!(path_concat(&P::empty(), &p).unwrap(), p);
        assert_eq!(path_concat(&p, &P::empty()).unwrap(), p);
        assert_eq!(P::empty().len(), 0);
        assert_eq!(P::empty().last(), None);
    }

    #[test]
    fn mismatched_endpoints() {
        let p: P = Path::edge("i", "α", "j");
        let r: P = Path::edge("k", "β", "m");
        assert!(path_concat(&p, &r).is_err());
    }

    #[test]
    fn join_of_empty_sets() {
        let r: Vec<P> = vec![Path::edge("a", "x", "b")];
        assert!(path_join(&[], &r).is_empty());
        assert_eq!(path_join(&r, &[P::empty()]), r);
    }

    #[test]
    fn single_vertex_paths() {
        let p: P = Path::edge("i", "α", "j");
        let v: P = Path::vertex("j");
        assert_eq!(path_concat(&p, &v).unwrap(), p);
        assert_eq!(seq(&v, true), "j");
    }

    #[test]
    fn incidence_in_graph() {
        let g = Graph::modern();
        let v = |id: &str| g.vertex_by_id(id).unwrap();
        let e = |id: &str| g.edge_by_id(id).unwrap();
        assert!(Path::new(v("1"), vec![(e("8"), v("4")), (e("10"), v("5"))]).is_incident_in(&g));
        assert!(!Path::new(v("1"), vec![(e("10"), v("5"))]).is_incident_in(&g));
    }
}
