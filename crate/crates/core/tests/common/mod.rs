#![allow(dead_code)]

use std::collections::BTreeSet;

use gremlin_algebra::evaluator::{
    oracle_match, Binding, BindingSet, OracleGraphPattern, Value, LOCATION_COLUMN,
};
use gremlin_algebra::graph::{GraphBuilder, PropertyValue};
use gremlin_algebra::{compile, evaluate, parse_traversal, Graph, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_KNOWN_AGE: &str = r#"g.V().has("name","marko").out("knows").values("age").max()"#;
pub const CO_CREATORS: &str = "g.V().match(
    __.as('a').out('created').as('b'),
    __.as('b').has('name', 'lop'),
    __.as('b').in('created').as('c'),
    __.as('c').has('age', 30)).select('a','c').by('name')";
pub const SORTED_AGES: &str =
    "g.V().match(__.as('a').hasLabel('person').values('age').as('b')).select('b').order().by(asc)";
pub const UNION_OF_MATCHES: &str = "g.V().union(
    __.match(__.as('a').out('created').as('c')),
    __.match(__.as('b').out('created').as('c'))).select('a','c')";

const NAMES: [&str; 6] = ["marko", "vadas", "lop", "josh", "ripple", "peter"];
const AGES: [i64; 5] = [27, 29, 30, 32, 35];

/// A random graph with at most 8 vertices and 16 edges. Persons carry a name
/// and usually an age; software carries a name and a language.
pub fn random_graph(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(0..=16);
    let mut b = GraphBuilder::new();
    for i in 1..=n {
        let name = PropertyValue::from(*NAMES.choose(&mut rng).unwrap());
        if rng.gen_bool(0.6) {
            let mut props = vec![("name", name)];
            if rng.gen_bool(0.8) {
                props.push(("age", PropertyValue::Int(*AGES.choose(&mut rng).unwrap())));
            }
            b.add_vertex(&i.to_string(), "person", props);
        } else {
            let lang = PropertyValue::from(if rng.gen_bool(0.7) { "java" } else { "python" });
            b.add_vertex(&i.to_string(), "software", [("name", name), ("lang", lang)]);
        }
    }
    for j in 1..=m {
        let label = if rng.gen_bool(0.5) { "knows" } else { "created" };
        let out_v = rng.gen_range(1..=n).to_string();
        let in_v = rng.gen_range(1..=n).to_string();
        b.add_edge(
            &format!("e{j}"),
            label,
            &out_v,
            &in_v,
            [("weight", PropertyValue::Float(rng.gen_range(0..10) as f64 / 10.0))],
        );
    }
    b.build().expect("generated graph is valid")
}

pub fn run(query: &str, g: &Graph) -> BindingSet {
    let plan = compile(&parse_traversal(query).unwrap()).unwrap();
    evaluate(&plan, g).unwrap()
}

fn vars(names: &[&str]) -> Vec<Var> {
    names.iter().map(|n| Var::new(*n)).collect()
}

fn property(g: &Graph, value: &Value, key: &str) -> Option<PropertyValue> {
    let Value::Vertex(v) = value else { return None };
    g.vertex_properties(*v)?.get(key).cloned()
}

/// Replaces each vertex of `columns` by its `key` property, dropping rows
/// where it is absent.
fn by_property(g: &Graph, set: &BindingSet, columns: &[&str], key: &str) -> BindingSet {
    let rows = set
        .rows()
        .iter()
        .filter_map(|row| {
            let mut out = Binding::new();
            for c in columns {
                out.insert(*c, property(g, row.get(c)?, key)?);
            }
            Some(out)
        })
        .collect();
    BindingSet::new(vars(columns), rows)
}

fn rename(set: &BindingSet, from: &str, to: &str) -> BindingSet {
    let rows = set
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|(k, v)| {
                    let k = if k.as_str() == from { to } else { k.as_str() };
                    (k.to_string(), v.clone())
                })
                .collect()
        })
        .collect();
    let schema = set
        .schema()
        .iter()
        .map(|v| if v.as_str() == from { Var::new(to) } else { v.clone() })
        .collect();
    BindingSet::new(schema, rows)
}

fn ints(set: &BindingSet, column: &str) -> Vec<i64> {
    set.column(column)
        .map(|v| match v {
            Some(Value::Property(PropertyValue::Int(i))) => *i,
            other => panic!("expected an integer, got {other:?}"),
        })
        .collect()
}

fn int_column(column: &str, values: impl IntoIterator<Item = i64>) -> BindingSet {
    BindingSet::new(
        vars(&[column]),
        values.into_iter().map(|i| [(column, i)].into_iter().collect()).collect(),
    )
}

fn oracle(p: OracleGraphPattern, g: &Graph) -> BindingSet {
    oracle_match(&p, g).unwrap()
}

pub struct CorpusQuery {
    pub name: &'static str,
    pub text: &'static str,
    /// The expected result, computed by brute-force matching plus plain
    /// collection operations.
    pub oracle: fn(&Graph) -> BindingSet,
}

pub fn corpus() -> Vec<CorpusQuery> {
    vec![
        CorpusQuery {
            name: "max-known-age",
            text: MAX_KNOWN_AGE,
            oracle: |g| {
                let m = oracle(
                    OracleGraphPattern::new()
                        .has("a", "name", "marko")
                        .edge("a", "knows", "b")
                        .value("x", "b", "age")
                        .output(&["x"]),
                    g,
                );
                int_column(LOCATION_COLUMN, ints(&m, "x").into_iter().max())
            },
        },
        CorpusQuery {
            name: "co-creators",
            text: CO_CREATORS,
            oracle: |g| {
                let m = oracle(
                    OracleGraphPattern::new()
                        .edge("a", "created", "b")
                        .has("b", "name", "lop")
                        .edge("c", "created", "b")
                        .has("c", "age", 30),
                    g,
                );
                by_property(g, &m, &["a", "c"], "name")
            },
        },
        CorpusQuery {
            name: "sorted-ages",
            text: SORTED_AGES,
            oracle: |g| {
                oracle(
                    OracleGraphPattern::new()
                        .label("a", "person")
                        .value("b", "a", "age")
                        .output(&["b"]),
                    g,
                )
            },
        },
        CorpusQuery {
            name: "union-of-matches",
            text: UNION_OF_MATCHES,
            // Rows of the second branch bind no `a` and are dropped by select('a','c').
            oracle: |g| oracle(OracleGraphPattern::new().edge("a", "created", "c"), g),
        },
        CorpusQuery {
            name: "has-only",
            text: "g.V().hasLabel('person').has('age')",
            oracle: |g| {
                let m = oracle(
                    OracleGraphPattern::new().label("x", "person").has_key("x", "age"),
                    g,
                );
                rename(&m, "x", LOCATION_COLUMN)
            },
        },
        CorpusQuery {
            name: "dedup",
            text: "g.V().match(__.as('a').out('created').as('b')).select('b').dedup()",
            oracle: |g| {
                oracle(
                    OracleGraphPattern::new().edge("a", "created", "b").output(&["b"]),
                    g,
                )
                .dedup()
            },
        },
        CorpusQuery {
            name: "limit",
            text: "g.V().match(__.as('a').hasLabel('person').values('age').as('b'))\
                   .select('b').order().by(desc).limit(2)",
            oracle: |g| {
                let m = oracle(
                    OracleGraphPattern::new()
                        .label("a", "person")
                        .value("b", "a", "age")
                        .output(&["b"]),
                    g,
                );
                let mut ages = ints(&m, "b");
                ages.sort_unstable_by(|x, y| y.cmp(x));
                ages.truncate(2);
                int_column("b", ages)
            },
        },
        CorpusQuery {
            name: "union",
            text: "g.V().union(__.match(__.as('a').out('knows').as('b')), \
                   __.match(__.as('a').out('created').as('b'))).select('a','b')",
            oracle: |g| {
                let knows = oracle(OracleGraphPattern::new().edge("a", "knows", "b"), g);
                let created = oracle(OracleGraphPattern::new().edge("a", "created", "b"), g);
                let mut rows = knows.into_rows();
                rows.extend(created.into_rows());
                BindingSet::new(vars(&["a", "b"]), rows)
            },
        },
        CorpusQuery {
            name: "disconnected-join",
            text: "g.V().match(__.as('a').hasLabel('software'), \
                   __.as('b').out('knows').as('c')).select('a','c')",
            oracle: |g| {
                oracle(
                    OracleGraphPattern::new()
                        .label("a", "software")
                        .edge("b", "knows", "c")
                        .output(&["a", "c"]),
                    g,
                )
            },
        },
        CorpusQuery {
            name: "two-hop-where",
            text: "g.V().match(__.as('a').out('knows').as('b'), __.as('b').out('created').as('c'))\
                   .where(__.as('a').out('created').as('c')).select('a','c')",
            oracle: |g| {
                let m = oracle(
                    OracleGraphPattern::new()
                        .edge("a", "knows", "b")
                        .edge("b", "created", "c"),
                    g,
                );
                let direct: BTreeSet<(Value, Value)> = oracle(
                    OracleGraphPattern::new().edge("a", "created", "c"),
                    g,
                )
                .rows()
                .iter()
                .map(|r| (r.get("a").unwrap().clone(), r.get("c").unwrap().clone()))
                .collect();
                let rows = m
                    .rows()
                    .iter()
                    .filter(|r| {
                        direct.contains(&(r.get("a").unwrap().clone(), r.get("c").unwrap().clone()))
                    })
                    .cloned()
                    .collect::<Vec<_>>();
                BindingSet::new(vars(&["a", "b", "c"]), rows).project(&vars(&["a", "c"]))
            },
        },
    ]
}

/// Checks every corpus query against its oracle on `graphs` random graphs.
/// Returns a description of the first mismatch.
pub fn oracle_equivalence(graphs: u64) -> Result<usize, String> {
    let corpus = corpus();
    let mut checked = 0;
    for seed in 0..graphs {
        let g = random_graph(seed);
        for q in &corpus {
            let got = run(q.text, &g);
            let want = (q.oracle)(&g);
            if !got.multiset_eq(&want) {
                return Err(format!(
                    "{} on graph seed {seed}: evaluator {:?} vs oracle {:?}",
                    q.name,
                    got.tuples(),
                    want.tuples()
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
