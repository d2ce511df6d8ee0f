//! Brute-force subgraph matching used as a reference for the evaluator.
//!
//! Every assignment of vertex variables to graph vertices is enumerated and
//! kept when all edge, label and property constraints hold. The row
//! multiplicity is the number of ways to map the pattern edges onto graph
//! edges, so parallel edges count separately just as they do for traversal.
//! This module deliberately shares no operator code with the evaluator.

use std::cmp::Ordering;

use crate::algebra::{Comparator, Predicate, Var};
use crate::graph::{Graph, PropertyValue, VertexId};

use super::{Binding, BindingSet, EvalError, Value};

/// Largest number of vertex variables [`oracle_match`] accepts.
pub const MAX_ORACLE_VARS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEdge {
    pub from: Var,
    pub label: Option<String>,
    pub to: Var,
}

/// `var` takes the value of property `key` on the vertex bound to `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleValue {
    pub var: Var,
    pub source: Var,
    pub key: String,
}

/// A small pattern graph: vertex variables, labeled edges between them and
/// constant constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleGraphPattern {
    pub vertex_vars: Vec<Var>,
    pub edges: Vec<OracleEdge>,
    pub labels: Vec<(Var, String)>,
    pub properties: Vec<(Var, String, Predicate)>,
    pub values: Vec<OracleValue>,
    /// Result columns. When empty, all vertex and value variables are kept.
    pub output: Vec<Var>,
}

impl OracleGraphPattern {
    pub fn new() -> Self {
        Self::default()
    }

    fn declare(&mut self, var: &str) {
        let var = Var::new(var);
        if !self.vertex_vars.contains(&var) {
            self.vertex_vars.push(var);
        }
    }

    pub fn vertex(mut self, var: &str) -> Self {
        self.declare(var);
        self
    }

    pub fn edge(mut self, from: &str, label: &str, to: &str) -> Self {
        self.declare(from);
        self.declare(to);
        self.edges.push(OracleEdge {
            from: Var::new(from),
            label: Some(label.to_string()),
            to: Var::new(to),
        });
        self
    }

    pub fn any_edge(mut self, from: &str, to: &str) -> Self {
        self.declare(from);
        self.declare(to);
        self.edges.push(OracleEdge {
            from: Var::new(from),
            label: None,
            to: Var::new(to),
        });
        self
    }

    pub fn label(mut self, var: &str, label: &str) -> Self {
        self.declare(var);
        self.labels.push((Var::new(var), label.to_string()));
        self
    }

    pub fn has(mut self, var: &str, key: &str, value: impl Into<PropertyValue>) -> Self {
        self.declare(var);
        self.properties.push((
            Var::new(var),
            key.to_string(),
            Predicate::Compare(Comparator::Eq, value.into()),
        ));
        self
    }

    pub fn has_key(mut self, var: &str, key: &str) -> Self {
        self.declare(var);
        self.properties
            .push((Var::new(var), key.to_string(), Predicate::Exists));
        self
    }

    pub fn value(mut self, var: &str, source: &str, key: &str) -> Self {
        self.declare(source);
        self.values.push(OracleValue {
            var: Var::new(var),
            source: Var::new(source),
            key: key.to_string(),
        });
        self
    }

    pub fn output(mut self, vars: &[&str]) -> Self {
        self.output = vars.iter().map(|v| Var::new(*v)).collect();
        self
    }

    fn columns(&self) -> Vec<Var> {
        if !self.output.is_empty() {
            return self.output.clone();
        }
        let mut cols = self.vertex_vars.clone();
        cols.extend(self.values.iter().map(|v| v.var.clone()));
        cols
    }
}

/// Enumerates all matches of `pattern` in `g`.
pub fn oracle_match(pattern: &OracleGraphPattern, g: &Graph) -> Result<BindingSet, EvalError> {
    let n = pattern.vertex_vars.len();
    if n > MAX_ORACLE_VARS {
        return Err(EvalError::PatternTooLarge {
            max: MAX_ORACLE_VARS,
            got: n,
        });
    }
    let columns = pattern.columns();
    let mut result = BindingSet::empty(columns.clone());
    let vertices: Vec<VertexId> = g.vertices().collect();
    if n > 0 && vertices.is_empty() {
        return Ok(result);
    }
    let slot = |v: &Var| {
        pattern
            .vertex_vars
            .iter()
            .position(|x| x == v)
            .expect("constraint on undeclared variable")
    };

    let mut digits = vec![0usize; n];
    loop {
        let assign: Vec<VertexId> = digits.iter().map(|&d| vertices[d]).collect();
        if let Some((mult, row)) = check(pattern, g, &assign, &slot) {
            let row: Binding = row
                .into_iter()
                .filter(|(k, _)| columns.contains(k))
                .collect();
            for _ in 0..mult {
                result.push(row.clone());
            }
        }
        // Advance the odometer; stop after the last assignment.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(result);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < vertices.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn check(
    pattern: &OracleGraphPattern,
    g: &Graph,
    assign: &[VertexId],
    slot: &dyn Fn(&Var) -> usize,
) -> Option<(usize, Vec<(Var, Value)>)> {
    for (var, label) in &pattern.labels {
        if g.vertex_label(assign[slot(var)]) != Some(label.as_str()) {
            return None;
        }
    }
    for (var, key, predicate) in &pattern.properties {
        let props = g.vertex_properties(assign[slot(var)])?;
        let value = props.get(key)?;
        if let Predicate::Compare(cmp, want) = predicate {
            if !holds(value, *cmp, want) {
                return None;
            }
        }
    }
    let mut mult = 1usize;
    for e in &pattern.edges {
        let (u, w) = (assign[slot(&e.from)], assign[slot(&e.to)]);
        let count = g
            .edges()
            .iter()
            .filter(|rec| {
                rec.out_v == u && rec.in_v == w && e.label.as_ref().is_none_or(|l| *l == rec.label)
            })
            .count();
        mult *= count;
        if mult == 0 {
            return None;
        }
    }
    let mut row: Vec<(Var, Value)> = pattern
        .vertex_vars
        .iter()
        .zip(assign)
        .map(|(v, id)| (v.clone(), Value::Vertex(*id)))
        .collect();
    for v in &pattern.values {
        let props = g.vertex_properties(assign[slot(&v.source)])?;
        let value = props.get(&v.key)?;
        row.push((v.var.clone(), Value::Property(value.clone())));
    }
    Some((mult, row))
}

fn holds(value: &PropertyValue, cmp: Comparator, want: &PropertyValue) -> bool {
    use PropertyValue as P;
    let ord: Option<Ordering> = match (value, want) {
        (P::Int(a), P::Int(b)) => Some(a.cmp(b)),
        (P::Int(a), P::Float(b)) => (*a as f64).partial_cmp(b),
        (P::Float(a), P::Int(b)) => a.partial_cmp(&(*b as f64)),
        (P::Float(a), P::Float(b)) => a.partial_cmp(b),
        (P::Str(a), P::Str(b)) if matches!(cmp, Comparator::Eq | Comparator::Neq) => Some(a.cmp(b)),
        (P::Bool(a), P::Bool(b)) if matches!(cmp, Comparator::Eq | Comparator::Neq) => Some(a.cmp(b)),
        _ => return false,
    };
    let Some(ord) = ord else {
        return cmp == Comparator::Neq;
    };
    match cmp {
        Comparator::Eq => ord.is_eq(),
        Comparator::Neq => ord.is_ne(),
        Comparator::Lt => ord.is_lt(),
        Comparator::Le => ord.is_le(),
        Comparator::Gt => ord.is_gt(),
        Comparator::Ge => ord.is_ge(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn creators_of_lop() {
        let g = Graph::modern();
        let p = OracleGraphPattern::new()
            .edge("a", "created", "b")
            .has("b", "name", "lop")
            .output(&["a"]);
        let r = oracle_match(&p, &g).unwrap();
        let mut names: Vec<String> = r.column("a").map(|v| v.unwrap().display(&g).to_string()).collect();
        names.sort();
        assert_eq!(names, ["v[1]", "v[4]", "v[6]"]);
    }

    #[test]
    fn empty_pattern_has_one_empty_binding() {
        let r = oracle_match(&OracleGraphPattern::new(), &Graph::modern()).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.rows()[0].is_empty());
    }

    #[test]
    fn unsatisfiable_label() {
        let p = OracleGraphPattern::new().label("a", "robot");
        assert!(oracle_match(&p, &Graph::modern()).unwrap().is_empty());
    }

    #[test]
    fn size_bound() {
        let mut p = OracleGraphPattern::new();
        for v in ["a", "b", "c", "d", "e", "f", "g"] {
            p = p.vertex(v);
        }
        assert!(matches!(
            oracle_match(&p, &Graph::modern()),
            Err(EvalError::PatternTooLarge { got: 7, .. })
        ));
    }

    #[test]
    fn parallel_edges_multiply() {
        let g = crate::graph::GraphBuilder::new()
            .vertex("1", "person", [("x", PropertyValue::Int(1))])
            .vertex("2", "person", [("x", PropertyValue::Int(2))])
            .edge("e1", "knows", "1", "2", [("w", PropertyValue::Int(1))])
            .edge("e2", "knows", "1", "2", [("w", PropertyValue::Int(2))])
            .build()
            .unwrap();
        let p = OracleGraphPattern::new().edge("a", "knows", "b");
        assert_eq!(oracle_match(&p, &g).unwrap().len(), 2);
        let p = p.edge("a", "knows", "b");
        assert_eq!(oracle_match(&p, &g).unwrap().len(), 4);
    }
}
