//! Multiset evaluation of algebra plans over a [`Graph`].
//!
//! Rows flow between operators as [`Traverser`]s: a current location plus the
//! labeled values collected so far. Every operator preserves the order of its
//! input except `order()`, and `V_g` emits vertices in ascending external-id
//! order, so results (and therefore `limit()`) are deterministic.

mod matching;
pub mod oracle;
pub mod path;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{AggregateFn, AlgebraExpr, Comparator, PatternOp, Predicate, SortOrder, Var};
use crate::graph::{EdgeId, ElementId, Graph, GraphError, PropertyValue, VertexId};

pub use matching::{bind, eval_match, eval_match_all};
pub use oracle::{oracle_match, OracleEdge, OracleGraphPattern, OracleValue, MAX_ORACLE_VARS};
pub use path::{path_concat, path_join, Path, PathError};

/// Column name used for the traverser's location when it carries no label.
pub const LOCATION_COLUMN: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Vertex(VertexId),
    Edge(EdgeId),
    Property(PropertyValue),
    /// Several values kept together, as produced by `group()`.
    List(Vec<Value>),
}

impl Value {
    pub fn as_element(&self) -> Option<ElementId> {
        match self {
            Value::Vertex(v) => Some(ElementId::Vertex(*v)),
            Value::Edge(e) => Some(ElementId::Edge(*e)),
            _ => None,
        }
    }

    pub fn as_property(&self) -> Option<&PropertyValue> {
        match self {
            Value::Property(p) => Some(p),
            _ => None,
        }
    }

    /// Display form with external element ids, e.g. `v[1]` or `e[7]`.
    pub fn display<'a>(&'a self, graph: &'a Graph) -> DisplayValue<'a> {
        DisplayValue { value: self, graph }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Vertex(_) => 0,
            Value::Edge(_) => 1,
            Value::Property(PropertyValue::Bool(_)) => 2,
            Value::Property(PropertyValue::Int(_)) => 3,
            Value::Property(PropertyValue::Float(_)) => 4,
            Value::Property(PropertyValue::Str(_)) => 5,
            Value::List(_) => 6,
        }
    }
}

/// A total order used for multiset bookkeeping. It is type-strict (every
/// integer sorts before every float); use [`compare_values`] for the
/// user-facing ordering of `order()`.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use PropertyValue as P;
        match (self, other) {
            (Value::Vertex(a), Value::Vertex(b)) => a.cmp(b),
            (Value::Edge(a), Value::Edge(b)) => a.cmp(b),
            (Value::Property(P::Bool(a)), Value::Property(P::Bool(b))) => a.cmp(b),
            (Value::Property(P::Int(a)), Value::Property(P::Int(b))) => a.cmp(b),
            (Value::Property(P::Float(a)), Value::Property(P::Float(b))) => a.total_cmp(b),
            (Value::Property(P::Str(a)), Value::Property(P::Str(b))) => a.cmp(b),
            (Value::List(a), Value::List(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<VertexId> for Value {
    fn from(v: VertexId) -> Self {
        Value::Vertex(v)
    }
}

impl From<EdgeId> for Value {
    fn from(e: EdgeId) -> Self {
        Value::Edge(e)
    }
}

impl From<PropertyValue> for Value {
    fn from(p: PropertyValue) -> Self {
        Value::Property(p)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Property(PropertyValue::Int(i))
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Property(PropertyValue::Str(s.to_string()))
    }
}

pub struct DisplayValue<'a> {
    value: &'a Value,
    graph: &'a Graph,
}

impl fmt::Display for DisplayValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Value::Vertex(v) => write!(f, "v[{}]", self.graph.vertex_external_id(*v)),
            Value::Edge(e) => write!(f, "e[{}]", self.graph.edge_external_id(*e)),
            Value::Property(p) => write!(f, "{p}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", item.display(self.graph))?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{operator}: cannot compare {left} with {right}")]
    TypeError {
        operator: &'static str,
        left: String,
        right: String,
    },
    #[error("{operator}: expected {expected}, found {found}")]
    UnexpectedValue {
        operator: &'static str,
        expected: &'static str,
        found: String,
    },
    #[error("schema mismatch: [{left}] vs [{right}]")]
    SchemaMismatch { left: String, right: String },
    #[error("match() patterns {0:?} cannot run: their start labels are never bound")]
    UnboundPattern(Vec<usize>),
    #[error("{0} is not a vertex")]
    NotAVertex(String),
    #[error("oracle patterns are limited to {max} vertex variables, got {got}")]
    PatternTooLarge { max: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A traverser: current location `μ′`, labeled path `Δ` and the hidden labels
/// of the `match()` patterns it has already executed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Traverser {
    pub location: Option<Value>,
    pub labels: BTreeMap<Var, Value>,
    pub hidden: BTreeSet<usize>,
}

impl Traverser {
    pub fn at(location: impl Into<Value>) -> Self {
        Traverser {
            location: Some(location.into()),
            ..Traverser::default()
        }
    }

    pub fn label(&self, var: &str) -> Option<&Value> {
        self.labels.get(var)
    }
}

/// One result row: the values bound to each variable. A variable of the
/// schema may be missing only when a union merged branches binding
/// different labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding(BTreeMap<Var, Value>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<Var>, value: impl Into<Value>) {
        self.0.insert(var.into(), value.into());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<Var>, V: Into<Value>> FromIterator<(K, V)> for Binding {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Binding(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

/// A bag of bindings over an ordered column schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BindingSet {
    schema: Vec<Var>,
    rows: Vec<Binding>,
}

impl BindingSet {
    pub fn new(schema: Vec<Var>, rows: Vec<Binding>) -> Self {
        BindingSet { schema, rows }
    }

    pub fn empty(schema: Vec<Var>) -> Self {
        BindingSet {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn schema(&self) -> &[Var] {
        &self.schema
    }

    pub fn rows(&self) -> &[Binding] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Binding> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Binding) {
        self.rows.push(row);
    }

    /// Values of one column, in row order.
    pub fn column<'a>(&'a self, var: &'a str) -> impl Iterator<Item = Option<&'a Value>> + 'a {
        self.rows.iter().map(move |r| r.get(var))
    }

    /// Row tuples in schema order.
    pub fn tuples(&self) -> Vec<Vec<Option<Value>>> {
        self.rows
            .iter()
            .map(|r| self.schema.iter().map(|v| r.get(v).cloned()).collect())
            .collect()
    }

    /// Keeps only `vars`, in that order. Multiplicities are unchanged.
    pub fn project(&self, vars: &[Var]) -> BindingSet {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .filter(|(k, _)| vars.contains(k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect()
            })
            .collect();
        BindingSet::new(vars.to_vec(), rows)
    }

    /// Removes repeated rows, keeping first occurrences.
    pub fn dedup(&self) -> BindingSet {
        let mut seen = BTreeSet::new();
        let rows = self
            .rows
            .iter()
            .filter(|r| seen.insert((*r).clone()))
            .cloned()
            .collect();
        BindingSet::new(self.schema.clone(), rows)
    }

    /// Row multiplicities.
    pub fn multiset(&self) -> BTreeMap<Binding, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Bag equality, ignoring column and row order.
    pub fn multiset_eq(&self, other: &BindingSet) -> bool {
        let a: BTreeSet<&Var> = self.schema.iter().collect();
        let b: BTreeSet<&Var> = other.schema.iter().collect();
        a == b && self.multiset() == other.multiset()
    }
}

/// Bag union of two binding sets over the same columns: `|A ⊎ B| = |A| + |B|`.
pub fn multiset_union(a: &BindingSet, b: &BindingSet) -> Result<BindingSet, EvalError> {
    let left: BTreeSet<&Var> = a.schema.iter().collect();
    let right: BTreeSet<&Var> = b.schema.iter().collect();
    if left != right {
        return Err(EvalError::SchemaMismatch {
            left: join_vars(&a.schema),
            right: join_vars(&b.schema),
        });
    }
    let mut rows = a.rows.clone();
    rows.extend(b.rows.iter().cloned());
    Ok(BindingSet::new(a.schema.clone(), rows))
}

fn join_vars(vars: &[Var]) -> String {
    vars.iter()
        .map(Var::as_str)
        .collect::<Vec<_>>()
        .join(",")
}

/// Evaluates a plan. The result columns are the plan's output variables,
/// plus [`LOCATION_COLUMN`] when the final location carries no label.
pub fn evaluate(expr: &AlgebraExpr, g: &Graph) -> Result<BindingSet, EvalError> {
    let traversers = evaluate_traversers(expr, g)?;
    let schema = result_schema(expr);
    let rows = traversers
        .iter()
        .map(|t| row_binding(&schema, t))
        .collect();
    Ok(BindingSet::new(schema, rows))
}

/// Evaluates a plan and returns the raw traversers.
pub fn evaluate_traversers(expr: &AlgebraExpr, g: &Graph) -> Result<Vec<Traverser>, EvalError> {
    eval(expr, g)
}

/// Columns of [`evaluate`]'s result for `expr`.
pub fn result_schema(expr: &AlgebraExpr) -> Vec<Var> {
    let mut schema = expr.output_vars();
    if location_kind(expr) == LocationKind::Unlabeled {
        schema.push(Var::new(LOCATION_COLUMN));
    }
    schema
}

fn row_binding(schema: &[Var], t: &Traverser) -> Binding {
    schema
        .iter()
        .filter_map(|v| {
            let value = if v.as_str() == LOCATION_COLUMN {
                t.location.clone()
            } else {
                t.labels.get(v).cloned()
            };
            value.map(|val| (v.clone(), val))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum LocationKind {
    Unlabeled,
    Labeled(Var),
    Undefined,
}

/// What the location of the rows produced by `expr` refers to.
fn location_kind(expr: &AlgebraExpr) -> LocationKind {
    use AlgebraExpr::*;
    match expr {
        GetVertices | GetEdges | Aggregate { .. } => LocationKind::Unlabeled,
        Traverse { to_var, .. } => to_var
            .clone()
            .map_or(LocationKind::Unlabeled, LocationKind::Labeled),
        PropertyFilter {
            var,
            predicate: None,
            ..
        } => var.clone().map_or(LocationKind::Unlabeled, LocationKind::Labeled),
        PropertyFilter { var, input, .. } | LabelFilter { var, input, .. } => match var {
            Some(v) => LocationKind::Labeled(v.clone()),
            None => location_kind(input),
        },
        Selection { input, .. }
        | Dedup { input, .. }
        | Restriction { input, .. }
        | Sort { input, .. } => location_kind(input),
        Projection { vars, .. } => match vars.as_slice() {
            [single] => LocationKind::Labeled(single.clone()),
            _ => LocationKind::Undefined,
        },
        Group { .. } | Join { .. } => LocationKind::Undefined,
        Union { left, right } => {
            let l = location_kind(left);
            if l == location_kind(right) {
                l
            } else {
                LocationKind::Undefined
            }
        }
    }
}

fn eval(expr: &AlgebraExpr, g: &Graph) -> Result<Vec<Traverser>, EvalError> {
    use AlgebraExpr::*;
    if let Some((op, input)) = expr.as_pattern_op() {
        let rows = eval(input, g)?;
        return apply_op(&op, rows, g);
    }
    match expr {
        GetVertices => Ok(g.vertices().map(Traverser::at).collect()),
        GetEdges => Ok(g.edges().iter().map(|e| Traverser::at(e.id)).collect()),
        Selection {
            predicate,
            negated,
            input,
        } => {
            let rows = eval(input, g)?;
            let witnesses = eval(predicate, g)?;
            let shared = shared_vars(predicate, input);
            let keys: BTreeSet<Vec<Option<&Value>>> = witnesses
                .iter()
                .map(|w| shared.iter().map(|v| w.labels.get(v)).collect())
                .collect();
            Ok(rows
                .into_iter()
                .filter(|t| {
                    let found = keys.iter().any(|key| {
                        shared.iter().zip(key).all(|(v, w)| match (t.labels.get(v), w) {
                            (Some(a), Some(b)) => a == *b,
                            _ => true,
                        })
                    });
                    found != *negated
                })
                .collect())
        }
        Projection {
            vars,
            value_key,
            input,
        } => {
            let rows = eval(input, g)?;
            let mut out = Vec::with_capacity(rows.len());
            'rows: for t in rows {
                let mut labels = BTreeMap::new();
                for v in vars {
                    let Some(value) = t.labels.get(v) else {
                        continue 'rows;
                    };
                    let value = match value_key {
                        None => value.clone(),
                        Some(key) => match property_of(value, key, g)? {
                            Some(p) => Value::Property(p.clone()),
                            None => continue 'rows,
                        },
                    };
                    labels.insert(v.clone(), value);
                }
                let location = match vars.as_slice() {
                    [single] => labels.get(single).cloned(),
                    _ => None,
                };
                out.push(Traverser {
                    location,
                    labels,
                    hidden: BTreeSet::new(),
                });
            }
            Ok(out)
        }
        Dedup { vars, input } => {
            let rows = eval(input, g)?;
            let mut seen = BTreeSet::new();
            Ok(rows
                .into_iter()
                .filter(|t| {
                    let key: Vec<Option<Value>> = if vars.is_empty() {
                        vec![t.location.clone()]
                    } else {
                        vars.iter().map(|v| t.labels.get(v).cloned()).collect()
                    };
                    seen.insert(key)
                })
                .collect())
        }
        Restriction { skip, take, input } => Ok(eval(input, g)?
            .into_iter()
            .skip(*skip)
            .take(*take)
            .collect()),
        Sort { keys, input } => {
            let rows = eval(input, g)?;
            let mut keyed = Vec::with_capacity(rows.len());
            for t in rows {
                let k: Vec<Option<Value>> = keys
                    .iter()
                    .map(|key| match &key.var {
                        None => t.location.clone(),
                        Some(v) => t.labels.get(v).cloned(),
                    })
                    .collect();
                keyed.push((k, t));
            }
            for (i, key) in keys.iter().enumerate() {
                let column: Vec<&Value> = keyed.iter().filter_map(|(k, _)| k[i].as_ref()).collect();
                check_comparable("order", &column, g)?;
                let _ = key;
            }
            keyed.sort_by(|(a, _), (b, _)| {
                for (i, key) in keys.iter().enumerate() {
                    let ord = match (&a[i], &b[i]) {
                        (Some(x), Some(y)) => compare_values(x, y).unwrap_or(Ordering::Equal),
                        (None, Some(_)) => Ordering::Less,
                        (Some(_), None) => Ordering::Greater,
                        (None, None) => Ordering::Equal,
                    };
                    let ord = match key.order {
                        SortOrder::Asc => ord,
                        SortOrder::Desc => ord.reverse(),
                    };
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                Ordering::Equal
            });
            Ok(keyed.into_iter().map(|(_, t)| t).collect())
        }
        Group { key, input } => {
            let schema = result_schema(input);
            let rows = eval(input, g)?;
            let mut grouped = Vec::with_capacity(rows.len());
            for t in &rows {
                let values: Vec<Value> = schema
                    .iter()
                    .filter_map(|v| row_binding(std::slice::from_ref(v), t).get(v).cloned())
                    .collect();
                if values.len() != schema.len() {
                    continue;
                }
                let member = match values.as_slice() {
                    [single] => single.clone(),
                    _ => Value::List(values.clone()),
                };
                let group_key = match key {
                    None => member.clone(),
                    Some(k) => {
                        let mut props = Vec::with_capacity(values.len());
                        for v in &values {
                            match property_of(v, k, g)? {
                                Some(p) => props.push(Value::Property(p.clone())),
                                None => break,
                            }
                        }
                        if props.len() != values.len() {
                            continue;
                        }
                        match props.len() {
                            1 => props.pop().expect("one property"),
                            _ => Value::List(props),
                        }
                    }
                };
                grouped.push((group_key, member));
            }
            let keys: Vec<&Value> = grouped.iter().map(|(k, _)| k).collect();
            check_comparable("group", &keys, g)?;
            grouped.sort_by(|(a, _), (b, _)| compare_values(a, b).unwrap_or(Ordering::Equal));
            Ok(grouped
                .into_iter()
                .map(|(k, m)| Traverser {
                    location: None,
                    labels: [(Var::new("key"), k), (Var::new("member"), m)]
                        .into_iter()
                        .collect(),
                    hidden: BTreeSet::new(),
                })
                .collect())
        }
        Join { left, right } => {
            let shared = shared_vars(left, right);
            let l = eval(left, g)?;
            let r = eval(right, g)?;
            let mut out = Vec::new();
            for a in &l {
                for b in &r {
                    let compatible = shared.iter().all(|v| match (a.labels.get(v), b.labels.get(v)) {
                        (Some(x), Some(y)) => x == y,
                        _ => true,
                    });
                    if compatible {
                        let mut labels = a.labels.clone();
                        for (k, v) in &b.labels {
                            labels.entry(k.clone()).or_insert_with(|| v.clone());
                        }
                        out.push(Traverser {
                            location: None,
                            labels,
                            hidden: a.hidden.union(&b.hidden).copied().collect(),
                        });
                    }
                }
            }
            Ok(out)
        }
        Union { left, right } => {
            let mut rows = eval(left, g)?;
            rows.extend(eval(right, g)?);
            Ok(rows)
        }
        Aggregate { func, input } => {
            let schema = result_schema(input);
            let [column] = schema.as_slice() else {
                return Err(EvalError::UnexpectedValue {
                    operator: func.name(),
                    expected: "a single column",
                    found: format!("columns [{}]", join_vars(&schema)),
                });
            };
            let rows = eval(input, g)?;
            let values: Vec<Value> = rows
                .iter()
                .filter_map(|t| row_binding(std::slice::from_ref(column), t).get(column).cloned())
                .collect();
            Ok(aggregate(*func, &values, g)?
                .map(|v| vec![Traverser::at(v)])
                .unwrap_or_default())
        }
        Traverse { .. } | PropertyFilter { .. } | LabelFilter { .. } => {
            unreachable!("pattern operators are handled above")
        }
    }
}

fn shared_vars(a: &AlgebraExpr, b: &AlgebraExpr) -> Vec<Var> {
    let right = b.output_vars();
    a.output_vars()
        .into_iter()
        .filter(|v| right.contains(v))
        .collect()
}

fn property_of<'g>(value: &Value, key: &str, g: &'g Graph) -> Result<Option<&'g PropertyValue>, EvalError> {
    match value.as_element() {
        Some(elem) => Ok(g.element_property(elem, key)?),
        None => Ok(None),
    }
}

fn aggregate(func: AggregateFn, values: &[Value], g: &Graph) -> Result<Option<Value>, EvalError> {
    if func == AggregateFn::Count {
        return Ok(Some(Value::from(values.len() as i64)));
    }
    let mut numbers = Vec::with_capacity(values.len());
    for v in values {
        match v {
            Value::Property(p @ (PropertyValue::Int(_) | PropertyValue::Float(_))) => numbers.push(p),
            other => {
                return Err(EvalError::UnexpectedValue {
                    operator: func.name(),
                    expected: "numbers",
                    found: other.display(g).to_string(),
                })
            }
        }
    }
    let all_int = numbers.iter().all(|p| matches!(p, PropertyValue::Int(_)));
    let pick = |a: Ordering| match func {
        AggregateFn::Max => a == Ordering::Greater,
        _ => a == Ordering::Less,
    };
    if all_int {
        let ints = numbers.iter().map(|p| match p {
            PropertyValue::Int(i) => *i,
            _ => unreachable!(),
        });
        let best = ints.reduce(|a, b| if pick(b.cmp(&a)) { b } else { a });
        Ok(best.map(Value::from))
    } else {
        let floats = numbers.iter().map(|p| match p {
            PropertyValue::Int(i) => *i as f64,
            PropertyValue::Float(x) => *x,
            _ => unreachable!(),
        });
        let best = floats.reduce(|a, b| if pick(b.total_cmp(&a)) { b } else { a });
        Ok(best.map(|x| Value::Property(PropertyValue::Float(x))))
    }
}

/// The ordering used by `order()` and `group()`: numbers compare by value
/// across integer and float, strings lexicographically, elements by id and
/// lists element-wise. Values of different kinds are incomparable.
pub fn compare_values(a: &Value, b: &Value) -> Option<Ordering> {
    use PropertyValue as P;
    match (a, b) {
        (Value::Vertex(x), Value::Vertex(y)) => Some(x.cmp(y)),
        (Value::Edge(x), Value::Edge(y)) => Some(x.cmp(y)),
        (Value::Property(x), Value::Property(y)) => match (x, y) {
            (P::Int(i), P::Int(j)) => Some(i.cmp(j)),
            (P::Int(_) | P::Float(_), P::Int(_) | P::Float(_)) => {
                Some(as_f64(x)?.total_cmp(&as_f64(y)?))
            }
            (P::Str(s), P::Str(t)) => Some(s.cmp(t)),
            (P::Bool(s), P::Bool(t)) => Some(s.cmp(t)),
            _ => None,
        },
        (Value::List(xs), Value::List(ys)) => {
            for (x, y) in xs.iter().zip(ys) {
                match compare_values(x, y)? {
                    Ordering::Equal => continue,
                    ord => return Some(ord),
                }
            }
            Some(xs.len().cmp(&ys.len()))
        }
        _ => None,
    }
}

fn as_f64(p: &PropertyValue) -> Option<f64> {
    match p {
        PropertyValue::Int(i) => Some(*i as f64),
        PropertyValue::Float(x) => Some(*x),
        _ => None,
    }
}

fn check_comparable(operator: &'static str, values: &[&Value], g: &Graph) -> Result<(), EvalError> {
    let Some(first) = values.first() else {
        return Ok(());
    };
    for v in &values[1..] {
        if compare_values(first, v).is_none() {
            return Err(EvalError::TypeError {
                operator,
                left: first.display(g).to_string(),
                right: v.display(g).to_string(),
            });
        }
    }
    Ok(())
}

/// Predicate test for `has()`. Numbers compare across integer and float;
/// strings and booleans support only `=` and `!=`. Any other pairing is
/// simply unsatisfied.
fn satisfies(value: &PropertyValue, cmp: Comparator, target: &PropertyValue) -> bool {
    use PropertyValue as P;
    let ord = match (value, target) {
        (P::Int(a), P::Int(b)) => a.cmp(b),
        (P::Int(_) | P::Float(_), P::Int(_) | P::Float(_)) => {
            match as_f64(value).zip(as_f64(target)) {
                Some((a, b)) => match a.partial_cmp(&b) {
                    Some(o) => o,
                    None => return cmp == Comparator::Neq,
                },
                None => return false,
            }
        }
        (P::Str(a), P::Str(b)) => return equality_only(cmp, a == b),
        (P::Bool(a), P::Bool(b)) => return equality_only(cmp, a == b),
        _ => return false,
    };
    match cmp {
        Comparator::Eq => ord == Ordering::Equal,
        Comparator::Neq => ord != Ordering::Equal,
        Comparator::Lt => ord == Ordering::Less,
        Comparator::Le => ord != Ordering::Greater,
        Comparator::Gt => ord == Ordering::Greater,
        Comparator::Ge => ord != Ordering::Less,
    }
}

fn equality_only(cmp: Comparator, equal: bool) -> bool {
    match cmp {
        Comparator::Eq => equal,
        Comparator::Neq => !equal,
        _ => false,
    }
}

/// The element an operator reads: the value labeled `var` (binding it to the
/// location first if unbound) or, without a label, the location.
fn anchor(t: &mut Traverser, var: &Option<Var>) -> Option<Value> {
    match var {
        None => t.location.clone(),
        Some(x) => {
            if let Some(v) = t.labels.get(x) {
                return Some(v.clone());
            }
            let loc = t.location.clone()?;
            t.labels.insert(x.clone(), loc.clone());
            Some(loc)
        }
    }
}

/// Applies one traverse/filter operator to every row.
pub(crate) fn apply_op(op: &PatternOp, rows: Vec<Traverser>, g: &Graph) -> Result<Vec<Traverser>, EvalError> {
    let mut out = Vec::with_capacity(rows.len());
    for mut t in rows {
        match op {
            PatternOp::Traverse {
                dir,
                edge_label,
                from_var,
                to_var,
            } => {
                let Some(from) = anchor(&mut t, from_var) else {
                    continue;
                };
                let Value::Vertex(v) = from else {
                    return Err(EvalError::NotAVertex(from.display(g).to_string()));
                };
                for &(_, w) in g.adjacent(v, *dir, edge_label.as_deref())? {
                    let mut next = t.clone();
                    next.location = Some(Value::Vertex(w));
                    let next = match to_var {
                        Some(x) => bind(next, x),
                        None => Some(next),
                    };
                    out.extend(next);
                }
            }
            PatternOp::PropertyFilter {
                var,
                key,
                predicate: Some(predicate),
                ..
            } => {
                let Some(target) = anchor(&mut t, var) else {
                    continue;
                };
                let keep = match property_of(&target, key, g)? {
                    None => false,
                    Some(p) => match predicate {
                        Predicate::Exists => true,
                        Predicate::Compare(cmp, want) => satisfies(p, *cmp, want),
                    },
                };
                if keep {
                    t.location = Some(target);
                    out.push(t);
                }
            }
            PatternOp::PropertyFilter {
                var,
                key,
                predicate: None,
                source,
            } => {
                let Some(element) = anchor(&mut t, source) else {
                    continue;
                };
                let Some(p) = property_of(&element, key, g)? else {
                    continue;
                };
                t.location = Some(Value::Property(p.clone()));
                let t = match var {
                    Some(x) => bind(t, x),
                    None => Some(t),
                };
                out.extend(t);
            }
            PatternOp::LabelFilter { var, label } => {
                let Some(target) = anchor(&mut t, var) else {
                    continue;
                };
                let matches = target
                    .as_element()
                    .and_then(|e| g.element_label(e))
                    .is_some_and(|l| l == label);
                if matches {
                    t.location = Some(target);
                    out.push(t);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use crate::parser::parse_traversal;

    fn run(text: &str) -> BindingSet {
        let g = Graph::modern();
        evaluate(&compile(&parse_traversal(text).unwrap()).unwrap(), &g).unwrap()
    }

    fn names(g: &Graph, set: &BindingSet, var: &str) -> Vec<String> {
        set.column(var)
            .map(|v| v.unwrap().display(g).to_string())
            .collect()
    }

    #[test]
    fn max_known_age_max_age() {
        let r = run(r#"g.V().has("name","marko").out("knows").values("age").max()"#);
        assert_eq!(r.schema(), &[Var::new("_")]);
        assert_eq!(r.tuples(), vec![vec![Some(Value::from(32))]]);
    }

    #[test]
    fn vertices_in_id_order() {
        let g = Graph::modern();
        let r = run("g.V()");
        assert_eq!(names(&g, &r, "_"), ["v[1]", "v[2]", "v[3]", "v[4]", "v[5]", "v[6]"]);
        let r = run("g.E()");
        assert_eq!(r.len(), 6);
    }

    #[test]
    fn traversal_keeps_multiplicity() {
        let g = Graph::modern();
        let r = run("g.V().out('created')");
        assert_eq!(names(&g, &r, "_"), ["v[3]", "v[5]", "v[3]", "v[3]"]);
        let r = run("g.V().out('created').dedup()");
        assert_eq!(names(&g, &r, "_"), ["v[3]", "v[5]"]);
    }

    #[test]
    fn co_creators_is_empty_on_modern() {
        let r = run(
            "g.V().match(__.as('a').out('created').as('b'),__.as('b').has('name','lop'),\
             __.as('b').in('created').as('c'),__.as('c').has('age',30)).select('a','c').by('name')",
        );
        assert!(r.is_empty());
        assert_eq!(r.schema(), &[Var::new("a"), Var::new("c")]);
    }

    #[test]
    fn co_creators_with_age_32() {
        let r = run(
            "g.V().match(__.as('a').out('created').as('b'),__.as('b').has('name','lop'),\
             __.as('b').in('created').as('c'),__.as('c').has('age',32)).select('a','c').by('name')",
        );
        let expected: BindingSet = BindingSet::new(
            vec![Var::new("a"), Var::new("c")],
            ["marko", "josh", "peter"]
                .iter()
                .map(|a| [("a", *a), ("c", "josh")].into_iter().collect())
                .collect(),
        );
        assert!(r.multiset_eq(&expected), "{r:?}");
    }

    #[test]
    fn sorted_ages_sorted_ages() {
        let r = run("g.V().match(__.as('a').hasLabel('person').values('age').as('b')).select('b').order().by(asc)");
        let ages: Vec<Value> = r.column("b").map(|v| v.unwrap().clone()).collect();
        assert_eq!(ages, [27, 29, 32, 35].map(Value::from));
        let r = run("g.V().match(__.as('a').hasLabel('person').values('age').as('b')).select('b').order().by(desc)");
        let ages: Vec<Value> = r.column("b").map(|v| v.unwrap().clone()).collect();
        assert_eq!(ages, [35, 32, 29, 27].map(Value::from));
    }

    #[test]
    fn union_of_matches_keeps_rows_binding_both_labels() {
        let g = Graph::modern();
        let r = run(
            "g.V().union(__.match(__.as('a').out('created').as('c')),\
             __.match(__.as('b').out('created').as('c'))).select('a','c')",
        );
        assert_eq!(names(&g, &r, "a"), ["v[1]", "v[4]", "v[4]", "v[6]"]);
        assert_eq!(names(&g, &r, "c"), ["v[3]", "v[5]", "v[3]", "v[3]"]);
    }

    #[test]
    fn group_two_column_output() {
        let g = Graph::modern();
        let r = run("g.V().out('created').group().by('name')");
        assert_eq!(r.schema(), &[Var::new("key"), Var::new("member")]);
        let keys: Vec<String> = names(&g, &r, "key");
        assert_eq!(keys, ["lop", "lop", "lop", "ripple"]);
    }

    #[test]
    fn limit_and_where() {
        let g = Graph::modern();
        let r = run("g.V().limit(2)");
        assert_eq!(names(&g, &r, "_"), ["v[1]", "v[2]"]);
        let r = run(
            "g.V().match(__.as('a').out('created').as('b')).where(__.as('a').out('knows')).select('a')",
        );
        assert_eq!(names(&g, &r, "a"), ["v[1]"]);
        let r = run(
            "g.V().match(__.as('a').out('created').as('b')).not(__.as('a').out('knows')).select('a')",
        );
        assert_eq!(names(&g, &r, "a"), ["v[4]", "v[4]", "v[6]"]);
    }

    #[test]
    fn missing_property_drops_rows() {
        let r = run("g.V().values('age')");
        assert_eq!(r.len(), 4);
        let r = run("g.V().has('lang')");
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn predicate_typing() {
        use PropertyValue as P;
        assert!(satisfies(&P::Int(29), Comparator::Eq, &P::Float(29.0)));
        assert!(satisfies(&P::Int(29), Comparator::Lt, &P::Int(30)));
        assert!(!satisfies(&P::Int(29), Comparator::Eq, &P::Str("29".into())));
        assert!(!satisfies(&P::Str("a".into()), Comparator::Lt, &P::Str("b".into())));
        assert!(satisfies(&P::Str("a".into()), Comparator::Neq, &P::Str("b".into())));
    }

    #[test]
    fn order_over_mixed_types_is_an_error() {
        let g = Graph::modern();
        let plan = compile(&parse_traversal("g.V().values('name').order()").unwrap()).unwrap();
        assert!(evaluate(&plan, &g).is_ok());
        let g2 = crate::graph::GraphBuilder::new()
            .vertex("1", "person", [("x", PropertyValue::Int(1))])
            .vertex("2", "person", [("x", PropertyValue::from("one"))])
            .build()
            .unwrap();
        let plan = compile(&parse_traversal("g.V().values('x').order()").unwrap()).unwrap();
        assert!(matches!(
            evaluate(&plan, &g2),
            Err(EvalError::TypeError { operator: "order", .. })
        ));
    }

    #[test]
    fn max_of_empty_is_empty_and_mixed_numbers_coerce() {
        let r = run("g.V().has('name','nobody').values('age').max()");
        assert!(r.is_empty());
        let g = Graph::modern();
        let plan = compile(&parse_traversal("g.E().values('weight').max()").unwrap()).unwrap();
        let r = evaluate(&plan, &g).unwrap();
        assert_eq!(r.tuples(), vec![vec![Some(Value::Property(PropertyValue::Float(1.0)))]]);
        assert!(matches!(
            evaluate(&compile(&parse_traversal("g.V().values('name').max()").unwrap()).unwrap(), &g),
            Err(EvalError::UnexpectedValue { .. })
        ));
    }

    #[test]
    fn traversing_from_a_value_is_an_error() {
        let g = Graph::modern();
        let plan = compile(&parse_traversal("g.V().values('name').out()").unwrap()).unwrap();
        assert!(matches!(evaluate(&plan, &g), Err(EvalError::NotAVertex(_))));
    }

    #[test]
    fn multiset_union_worked_example() {
        let pair = |x: i64, y: i64| -> Binding { [("x", x), ("y", y)].into_iter().collect() };
        let schema = vec![Var::new("x"), Var::new("y")];
        let a = BindingSet::new(schema.clone(), vec![pair(1, 2), pair(3, 4), pair(3, 4), pair(4, 5)]);
        let b = BindingSet::new(schema.clone(), vec![pair(1, 2), pair(3, 4)]);
        let u = multiset_union(&a, &b).unwrap();
        let counts = u.multiset();
        assert_eq!(counts[&pair(1, 2)], 2);
        assert_eq!(counts[&pair(3, 4)], 3);
        assert_eq!(counts[&pair(4, 5)], 1);
        assert_eq!(u.len(), 6);
        let other = BindingSet::empty(vec![Var::new("x")]);
        assert!(matches!(multiset_union(&a, &other), Err(EvalError::SchemaMismatch { .. })));
    }

    #[test]
    fn value_order_is_type_strict() {
        assert_ne!(Value::from(1), Value::Property(PropertyValue::Float(1.0)));
        assert!(Value::from(5) < Value::Property(PropertyValue::Float(1.0)));
        assert_eq!(
            compare_values(&Value::from(5), &Value::Property(PropertyValue::Float(1.0))),
            Some(Ordering::Greater)
        );
        assert_eq!(compare_values(&Value::from(5), &Value::from("5")), None);
    }
}
