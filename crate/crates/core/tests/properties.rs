mod common;

use common::{corpus, random_graph, run};
use gremlin_algebra::compiler::{extract_patterns, stitch_patterns};
use gremlin_algebra::evaluator::{eval_match_all, path_concat, Path, Value};
use gremlin_algebra::parser::{parse_bytes, StepKind};
use gremlin_algebra::{compile, evaluate, parse_traversal, AlgebraExpr, Graph};
use proptest::prelude::*;
use proptest::sample::select;

fn corpus_index() -> impl Strategy<Value = usize> {
    0..corpus().len()
}

fn plan_of(i: usize) -> AlgebraExpr {
    compile(&parse_traversal(corpus()[i].text).unwrap()).unwrap()
}

fn query_text() -> impl Strategy<Value = String> {
    let step = prop_oneof![
        Just("out()".to_string()),
        select(vec!["knows", "created"]).prop_map(|l| format!("out('{l}')")),
        select(vec!["knows", "created"]).prop_map(|l| format!("in(\"{l}\")")),
        (select(vec!["name", "age"]), select(vec!["'lop'", "30", "29.5", "true"]))
            .prop_map(|(k, v)| format!("has('{k}',{v})")),
        select(vec!["person", "software"]).prop_map(|l| format!("hasLabel('{l}')")),
        Just("values('age')".to_string()),
        (0i64..5).prop_map(|n| format!("limit({n})")),
        Just("dedup()".to_string()),
        Just("order().by(desc)".to_string()),
    ];
    prop::collection::vec(step, 0..5).prop_map(|steps| {
        let mut q = "g.V()".to_string();
        for s in steps {
            q.push('.');
            q.push_str(&s);
        }
        q
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        match parse_bytes(&bytes) {
            Ok(_) => {}
            Err(e) => prop_assert!(e.position.offset <= bytes.len()),
        }
    }

    #[test]
    fn canonical_form_round_trips(text in query_text()) {
        let ast = parse_traversal(&text).unwrap();
        let again = parse_traversal(&ast.to_canonical()).unwrap();
        prop_assert_eq!(ast, again);
    }

    #[test]
    fn oracle_agrees_on_more_graphs(seed in 200u64..100_000, i in corpus_index()) {
        let g = random_graph(seed);
        let q = &corpus()[i];
        prop_assert!(run(q.text, &g).multiset_eq(&(q.oracle)(&g)), "{} on seed {}", q.name, seed);
    }

    #[test]
    fn dedup_is_idempotent(seed in any::<u64>(), i in corpus_index()) {
        let g = random_graph(seed);
        let plan = plan_of(i);
        let vars = plan.output_vars();
        let once = AlgebraExpr::Dedup { vars: vars.clone(), input: Box::new(plan.clone()) };
        let twice = AlgebraExpr::Dedup { vars, input: Box::new(once.clone()) };
        let all = evaluate(&plan, &g).unwrap();
        let d1 = evaluate(&once, &g).unwrap();
        prop_assert!(d1.len() <= all.len());
        prop_assert_eq!(d1, evaluate(&twice, &g).unwrap());
    }

    #[test]
    fn restriction_cardinality(seed in any::<u64>(), i in corpus_index(), l in 0usize..6, s in 0usize..6) {
        let g = random_graph(seed);
        let plan = plan_of(i);
        let n = evaluate(&plan, &g).unwrap().len();
        let r = AlgebraExpr::Restriction { skip: l, take: s, input: Box::new(plan) };
        prop_assert_eq!(evaluate(&r, &g).unwrap().len(), s.min(n.saturating_sub(l)));
    }

    #[test]
    fn sort_is_a_permutation(seed in any::<u64>()) {
        let g = random_graph(seed);
        let plain = run("g.V().values('age')", &g);
        let sorted = run("g.V().values('age').order().by(desc)", &g);
        prop_assert!(plain.multiset_eq(&sorted));
        let ages: Vec<&Value> = sorted.column("_").map(Option::unwrap).collect();
        prop_assert!(ages.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn concat_length_is_additive(a in 0usize..5, b in 0usize..5, c in 0usize..5) {
        let chain = |start: u32, n: usize| -> Path<u32, u32> {
            Path::new(start, (1..=n as u32).map(|i| (start + i, start + i)).collect())
        };
        let p = chain(0, a);
        let q = chain(a as u32, b);
        let r = chain((a + b) as u32, c);
        let pq = path_concat(&p, &q).unwrap();
        prop_assert_eq!(pq.len(), a + b);
        prop_assert_eq!(
            path_concat(&pq, &r).unwrap(),
            path_concat(&p, &path_concat(&q, &r).unwrap()).unwrap()
        );
    }

    #[test]
    fn match_order_does_not_matter(seed in 0u64..1000, perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let g = random_graph(seed);
        let mut ast = parse_traversal(common::CO_CREATORS).unwrap();
        let step = ast.steps.iter_mut().find(|s| s.kind == StepKind::Match).unwrap();
        let original = step.args.clone();
        step.args = perm.iter().map(|&i| original[i].clone()).collect();
        let permuted = evaluate(&compile(&ast).unwrap(), &g).unwrap();
        prop_assert!(permuted.multiset_eq(&run(common::CO_CREATORS, &g)));
    }

    #[test]
    fn matches_preserve_structure(seed in any::<u64>()) {
        let g = random_graph(seed);
        let ast = parse_traversal(
            "g.V().match(__.as('a').out('created').as('b'), __.as('b').in('knows').as('c'))",
        ).unwrap();
        let chains = extract_patterns(&ast.steps[1]).unwrap();
        let result = evaluate(&stitch_patterns(&chains, AlgebraExpr::GetVertices).unwrap(), &g).unwrap();
        let has_edge = |from: &Value, label: &str, to: &Value| {
            g.edges().iter().any(|e| {
                Value::Vertex(e.out_v) == *from && Value::Vertex(e.in_v) == *to && e.label == label
            })
        };
        for row in result.rows() {
            let (a, b, c) = (row.get("a").unwrap(), row.get("b").unwrap(), row.get("c").unwrap());
            prop_assert!(has_edge(a, "created", b));
            prop_assert!(has_edge(c, "knows", b));
        }
        prop_assert!(eval_match_all(&chains, &g).unwrap().multiset_eq(&result));
    }
}

#[test]
fn modern_graph_corpus_matches_oracle() {
    let g = Graph::modern();
    for q in corpus() {
        assert!(run(q.text, &g).multiset_eq(&(q.oracle)(&g)), "{}", q.name);
    }
}
