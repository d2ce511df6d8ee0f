//! Immutable in-memory property graph.
//!
//! A [`Graph`] is a directed, labeled multigraph whose vertices and edges carry
//! scalar properties. External ids are strings; at build time they are mapped
//! to dense integer ids assigned in ascending lexicographic order of the
//! external id, so iterating `0..vertex_count()` visits vertices in id order.
//!
//! Adjacency is precomputed per (vertex, direction, edge label).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

/// Bundled copy of the six-vertex "modern" graph.
pub const MODERN_JSON: &str = include_str!("../fixtures/modern.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementId {
    Vertex(VertexId),
    Edge(EdgeId),
}

impl From<VertexId> for ElementId {
    fn from(v: VertexId) -> Self {
        ElementId::Vertex(v)
    }
}

impl From<EdgeId> for ElementId {
    fn from(e: EdgeId) -> Self {
        ElementId::Edge(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Out,
    In,
}

/// Scalar property value.
///
/// Equality is type-strict and floats compare by bit pattern, so the type can
/// be used as a hash key for dedup and grouping.
#[derive(Clone, Debug)]
pub enum PropertyValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl PartialEq for PropertyValue {
    fn eq(&self, other: &Self) -> bool {
        use PropertyValue::*;
        match (self, other) {
            (Str(a), Str(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Bool(a), Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for PropertyValue {}

impl Hash for PropertyValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            PropertyValue::Str(s) => s.hash(state),
            PropertyValue::Int(i) => i.hash(state),
            PropertyValue::Float(f) => f.to_bits().hash(state),
            PropertyValue::Bool(b) => b.hash(state),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Str(s) => f.write_str(s),
            PropertyValue::Int(i) => write!(f, "{i}"),
            PropertyValue::Float(x) => write!(f, "{x:?}"),
            PropertyValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Str(s.to_string())
    }
}

impl From<String> for PropertyValue {
    fn from(s: String) -> Self {
        PropertyValue::Str(s)
    }
}

impl From<i64> for PropertyValue {
    fn from(i: i64) -> Self {
        PropertyValue::Int(i)
    }
}

impl From<f64> for PropertyValue {
    fn from(x: f64) -> Self {
        PropertyValue::Float(x)
    }
}

impl From<bool> for PropertyValue {
    fn from(b: bool) -> Self {
        PropertyValue::Bool(b)
    }
}

impl PropertyValue {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            PropertyValue::Str(s) => serde_json::Value::String(s.clone()),
            PropertyValue::Int(i) => serde_json::Value::from(*i),
            PropertyValue::Float(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            PropertyValue::Bool(b) => serde_json::Value::Bool(*b),
        }
    }

    fn from_json(value: &serde_json::Value) -> Result<Self, &'static str> {
        match value {
            serde_json::Value::String(s) => Ok(PropertyValue::Str(s.clone())),
            serde_json::Value::Bool(b) => Ok(PropertyValue::Bool(*b)),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(PropertyValue::Int(i))
                } else if n.is_u64() {
                    Err("integer out of 64-bit signed range")
                } else {
                    n.as_f64().map(PropertyValue::Float).ok_or("invalid number")
                }
            }
            serde_json::Value::Null => Err("null is not a property value"),
            serde_json::Value::Array(_) => Err("list values are not supported"),
            serde_json::Value::Object(_) => Err("nested objects are not supported"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub out_v: VertexId,
    pub label: String,
    pub in_v: VertexId,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate vertex id {0:?}")]
    DuplicateVertexId(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdgeId(String),
    #[error("edge {edge:?} references missing vertex {vertex:?}")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("label {0:?} is used as both a vertex label and an edge label")]
    LabelConflict(String),
    #[error("property {key:?} of {element:?}: {reason}")]
    UnsupportedProperty {
        element: String,
        key: String,
        reason: &'static str,
    },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(VertexId),
    #[error("unknown element {0:?}")]
    UnknownElement(ElementId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Default)]
struct Adjacency {
    all: Vec<(EdgeId, VertexId)>,
    by_label: BTreeMap<String, Vec<(EdgeId, VertexId)>>,
}

impl Adjacency {
    fn push(&mut self, label: &str, edge: EdgeId, other: VertexId) {
        self.all.push((edge, other));
        self.by_label
            .entry(label.to_string())
            .or_default()
            .push((edge, other));
    }

    fn get(&self, label: Option<&str>) -> &[(EdgeId, VertexId)] {
        match label {
            None => &self.all,
            Some(l) => self.by_label.get(l).map(Vec::as_slice).unwrap_or(&[]),
        }
    }
}

type Properties = BTreeMap<String, PropertyValue>;

#[derive(Clone, Debug)]
pub struct Graph {
    vertex_ext: Vec<String>,
    vertex_label: Vec<String>,
    vertex_props: Vec<Properties>,
    vertex_index: HashMap<String, VertexId>,
    edges: Vec<EdgeRecord>,
    edge_ext: Vec<String>,
    edge_props: Vec<Properties>,
    edge_index: HashMap<String, EdgeId>,
    out_adj: Vec<Adjacency>,
    in_adj: Vec<Adjacency>,
}

impl Graph {
    /// Parses a graph from the JSON interchange format.
    pub fn from_json_slice(bytes: &[u8]) -> Result<Graph, GraphError> {
        let file: GraphFile = serde_json::from_slice(bytes).map_err(|e| GraphError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_graph()
    }

    pub fn from_json_str(text: &str) -> Result<Graph, GraphError> {
        Self::from_json_slice(text.as_bytes())
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Graph, GraphError> {
        let mut buf = Vec::new();
        reader.read_to_end(&mut buf)?;
        Self::from_json_slice(&buf)
    }

    /// The bundled six-vertex, six-edge "modern" graph.
    pub fn modern() -> Graph {
        Self::from_json_str(MODERN_JSON).expect("bundled fixture is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ext.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices in ascending external-id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_ext.len() as u32).map(VertexId)
    }

    /// Edges in ascending external-id order.
    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Option<&EdgeRecord> {
        self.edges.get(e.0 as usize)
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        (v.0 as usize) < self.vertex_ext.len()
    }

    pub fn vertex_by_id(&self, ext: &str) -> Option<VertexId> {
        self.vertex_index.get(ext).copied()
    }

    pub fn edge_by_id(&self, ext: &str) -> Option<EdgeId> {
        self.edge_index.get(ext).copied()
    }

    pub fn vertex_external_id(&self, v: VertexId) -> &str {
        &self.vertex_ext[v.0 as usize]
    }

    pub fn edge_external_id(&self, e: EdgeId) -> &str {
        &self.edge_ext[e.0 as usize]
    }

    pub fn vertex_label(&self, v: VertexId) -> Option<&str> {
        self.vertex_label.get(v.0 as usize).map(String::as_str)
    }

    pub fn edge_label(&self, e: EdgeId) -> Option<&str> {
        self.edges.get(e.0 as usize).map(|r| r.label.as_str())
    }

    pub fn element_label(&self, elem: ElementId) -> Option<&str> {
        match elem {
            ElementId::Vertex(v) => self.vertex_label(v),
            ElementId::Edge(e) => self.edge_label(e),
        }
    }

    /// Out-edges of `v` paired with their target vertex, optionally restricted
    /// to one edge label. Ordered by edge id.
    pub fn out_adjacent(
        &self,
        v: VertexId,
        label: Option<&str>,
    ) -> Result<&[(EdgeId, VertexId)], GraphError> {
        self.out_adj
            .get(v.0 as usize)
            .map(|a| a.get(label))
            .ok_or(GraphError::UnknownVertex(v))
    }

    /// In-edges of `v` paired with their source vertex.
    pub fn in_adjacent(
        &self,
        v: VertexId,
        label: Option<&str>,
    ) -> Result<&[(EdgeId, VertexId)], GraphError> {
        self.in_adj
            .get(v.0 as usize)
            .map(|a| a.get(label))
            .ok_or(GraphError::UnknownVertex(v))
    }

    pub fn adjacent(
        &self,
        v: VertexId,
        dir: Direction,
        label: Option<&str>,
    ) -> Result<&[(EdgeId, VertexId)], GraphError> {
        match dir {
            Direction::Out => self.out_adjacent(v, label),
            Direction::In => self.in_adjacent(v, label),
        }
    }

    /// Property lookup. `Ok(None)` means the key is absent on an existing element.
    pub fn element_property(
        &self,
        elem: ElementId,
        key: &str,
    ) -> Result<Option<&PropertyValue>, GraphError> {
        let props = match elem {
            ElementId::Vertex(v) => self.vertex_props.get(v.0 as usize),
            ElementId::Edge(e) => self.edge_props.get(e.0 as usize),
        };
        props
            .map(|p| p.get(key))
            .ok_or(GraphError::UnknownElement(elem))
    }

    pub fn vertex_properties(&self, v: VertexId) -> Option<&BTreeMap<String, PropertyValue>> {
        self.vertex_props.get(v.0 as usize)
    }

    pub fn edge_properties(&self, e: EdgeId) -> Option<&BTreeMap<String, PropertyValue>> {
        self.edge_props.get(e.0 as usize)
    }
}

/// Incremental construction of a [`Graph`] with the same validation as the
/// JSON loader.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<(String, String, Properties)>,
    edges: Vec<(String, String, String, String, Properties)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex<I, K>(mut self, id: &str, label: &str, props: I) -> Self
    where
        I: IntoIterator<Item = (K, PropertyValue)>,
        K: Into<String>,
    {
        self.add_vertex(id, label, props);
        self
    }

    pub fn edge<I, K>(mut self, id: &str, label: &str, out_v: &str, in_v: &str, props: I) -> Self
    where
        I: IntoIterator<Item = (K, PropertyValue)>,
        K: Into<String>,
    {
        self.add_edge(id, label, out_v, in_v, props);
        self
    }

    pub fn add_vertex<I, K>(&mut self, id: &str, label: &str, props: I)
    where
        I: IntoIterator<Item = (K, PropertyValue)>,
        K: Into<String>,
    {
        let props = props.into_iter().map(|(k, v)| (k.into(), v)).collect();
        self.vertices.push((id.to_string(), label.to_string(), props));
    }

    pub fn add_edge<I, K>(&mut self, id: &str, label: &str, out_v: &str, in_v: &str, props: I)
    where
        I: IntoIterator<Item = (K, PropertyValue)>,
        K: Into<String>,
    {
        let props = props.into_iter().map(|(k, v)| (k.into(), v)).collect();
        self.edges.push((
            id.to_string(),
            label.to_string(),
            out_v.to_string(),
            in_v.to_string(),
            props,
        ));
    }

    pub fn build(mut self) -> Result<Graph, GraphError> {
        self.vertices.sort_by(|a, b| a.0.cmp(&b.0));
        self.edges.sort_by(|a, b| a.0.cmp(&b.0));

        let mut vertex_index = HashMap::with_capacity(self.vertices.len());
        let mut vertex_ext = Vec::with_capacity(self.vertices.len());
        let mut vertex_label = Vec::with_capacity(self.vertices.len());
        let mut vertex_props = Vec::with_capacity(self.vertices.len());
        for (i, (id, label, props)) in self.vertices.into_iter().enumerate() {
            if vertex_index.insert(id.clone(), VertexId(i as u32)).is_some() {
                return Err(GraphError::DuplicateVertexId(id));
            }
            vertex_ext.push(id);
            vertex_label.push(label);
            vertex_props.push(props);
        }

        let vertex_labels: HashSet<&str> = vertex_label.iter().map(String::as_str).collect();
        let mut edge_index = HashMap::with_capacity(self.edges.len());
        let mut edge_ext = Vec::with_capacity(self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut edge_props = Vec::with_capacity(self.edges.len());
        let mut out_adj = vec![Adjacency::default(); vertex_ext.len()];
        let mut in_adj = vec![Adjacency::default(); vertex_ext.len()];
        for (i, (id, label, out_v, in_v, props)) in self.edges.into_iter().enumerate() {
            let eid = EdgeId(i as u32);
            if edge_index.insert(id.clone(), eid).is_some() {
                return Err(GraphError::DuplicateEdgeId(id));
            }
            if vertex_labels.contains(label.as_str()) {
                return Err(GraphError::LabelConflict(label));
            }
            let lookup = |ext: &str| {
                vertex_index
                    .get(ext)
                    .copied()
                    .ok_or_else(|| GraphError::DanglingEndpoint {
                        edge: id.clone(),
                        vertex: ext.to_string(),
                    })
            };
            let src = lookup(&out_v)?;
            let dst = lookup(&in_v)?;
            out_adj[src.0 as usize].push(&label, eid, dst);
            in_adj[dst.0 as usize].push(&label, eid, src);
            edges.push(EdgeRecord {
                id: eid,
                out_v: src,
                label,
                in_v: dst,
            });
            edge_ext.push(id);
            edge_props.push(props);
        }

        Ok(Graph {
            vertex_ext,
            vertex_label,
            vertex_props,
            vertex_index,
            edges,
            edge_ext,
            edge_props,
            edge_index,
            out_adj,
            in_adj,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexEntry>,
    edges: Vec<EdgeEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexEntry {
    id: String,
    label: String,
    #[serde(default)]
    properties: serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    id: String,
    label: String,
    #[serde(rename = "outV")]
    out_v: String,
    #[serde(rename = "inV")]
    in_v: String,
    #[serde(default)]
    properties: serde_json::Map<String, serde_json::Value>,
}

fn convert_props(
    element: &str,
    raw: serde_json::Map<String, serde_json::Value>,
) -> Result<Vec<(String, PropertyValue)>, GraphError> {
    raw.into_iter()
        .map(|(key, value)| match PropertyValue::from_json(&value) {
            Ok(v) => Ok((key, v)),
            Err(reason) => Err(GraphError::UnsupportedProperty {
                element: element.to_string(),
                key,
                reason,
            }),
        })
        .collect()
}

impl GraphFile {
    fn into_graph(self) -> Result<Graph, GraphError> {
        let mut builder = GraphBuilder::new();
        for v in self.vertices {
            let props = convert_props(&v.id, v.properties)?;
            builder.add_vertex(&v.id, &v.label, props);
        }
        for e in self.edges {
            let props = convert_props(&e.id, e.properties)?;
            builder.add_edge(&e.id, &e.label, &e.out_v, &e.in_v, props);
        }
        builder.build()
    }
}
