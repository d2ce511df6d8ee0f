//! The traverser-level reading of `match()`: patterns run one at a time from
//! the labels the traverser already carries, each marked with a hidden label
//! once executed.

use crate::algebra::Var;
use crate::compiler::{match_start_label, PatternChain};
use crate::graph::Graph;

use super::{apply_op, BindingSet, EvalError, Traverser};

/// Binds `x` to the traverser's location. An unbound `x` is set; an `x`
/// already equal to the location leaves the traverser unchanged; any other
/// `x` kills it.
pub fn bind(mut t: Traverser, x: &Var) -> Option<Traverser> {
    let loc = t.location.as_ref()?;
    match t.labels.get(x) {
        None => {
            let loc = loc.clone();
            t.labels.insert(x.clone(), loc);
            Some(t)
        }
        Some(bound) if bound == loc => Some(t),
        Some(_) => None,
    }
}

/// Runs the pattern chains for one traverser. Among the patterns not yet
/// executed, the first (in the given order) whose start label is bound runs
/// next; execution stops once every pattern carries its hidden label.
pub fn eval_match(chains: &[PatternChain], g: &Graph, t: Traverser) -> Result<BindingSet, EvalError> {
    let mut rows = Vec::new();
    run(chains, g, t, &mut rows)?;
    Ok(to_binding_set(chains, rows))
}

/// Runs `match()` from every vertex, binding the match start label to it.
pub fn eval_match_all(chains: &[PatternChain], g: &Graph) -> Result<BindingSet, EvalError> {
    let start = match_start_label(chains);
    let mut rows = Vec::new();
    for v in g.vertices() {
        let t = Traverser::at(v);
        let t = match &start {
            Some(s) => bind(t, s),
            None => Some(t),
        };
        if let Some(t) = t {
            run(chains, g, t, &mut rows)?;
        }
    }
    Ok(to_binding_set(chains, rows))
}

fn run(chains: &[PatternChain], g: &Graph, t: Traverser, out: &mut Vec<Traverser>) -> Result<(), EvalError> {
    let next = chains.iter().enumerate().find(|(i, c)| {
        !t.hidden.contains(i)
            && c.start_var
                .as_ref()
                .is_some_and(|s| t.labels.contains_key(s))
    });
    let Some((i, chain)) = next else {
        let pending: Vec<usize> = (0..chains.len()).filter(|i| !t.hidden.contains(i)).collect();
        if pending.is_empty() {
            out.push(t);
            return Ok(());
        }
        return Err(EvalError::UnboundPattern(pending));
    };
    let mut rows = vec![t];
    for op in &chain.ops {
        rows = apply_op(op, rows, g)?;
    }
    for mut r in rows {
        r.hidden.insert(i);
        run(chains, g, r, out)?;
    }
    Ok(())
}

fn to_binding_set(chains: &[PatternChain], rows: Vec<Traverser>) -> BindingSet {
    let mut schema: Vec<Var> = Vec::new();
    for c in chains {
        for v in c.start_var.iter().chain(c.ops.iter().flat_map(|op| op.vars())) {
            if !schema.contains(v) {
                schema.push(v.clone());
            }
        }
    }
    let rows = rows
        .into_iter()
        .map(|t| t.labels.into_iter().collect())
        .collect();
    BindingSet::new(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{extract_patterns, stitch_patterns};
    use crate::evaluator::{evaluate, Value};
    use crate::parser::{parse_traversal, StepKind};

    fn chains(text: &str) -> Vec<PatternChain> {
        let ast = parse_traversal(text).unwrap();
        let step = ast.steps.iter().find(|s| s.kind == StepKind::Match).unwrap();
        extract_patterns(step).unwrap()
    }

    #[test]
    fn bind_three_cases() {
        let g = Graph::modern();
        let lop = Value::Vertex(g.vertex_by_id("3").unwrap());
        let ripple = Value::Vertex(g.vertex_by_id("5").unwrap());
        let b = Var::new("b");

        let t = bind(Traverser::at(lop.clone()), &b).unwrap();
        assert_eq!(t.label("b"), Some(&lop));

        let again = bind(t.clone(), &b).unwrap();
        assert_eq!(again, t);

        let mut moved = t;
        moved.location = Some(ripple);
        assert_eq!(bind(moved, &b), None);
    }

    #[test]
    fn co_creators_routes_agree() {
        let g = Graph::modern();
        for age in [30, 32] {
            let text = format!(
                "g.V().match(__.as('a').out('created').as('b'),__.as('b').has('name','lop'),\
                 __.as('b').in('created').as('c'),__.as('c').has('age',{age}))"
            );
            let cs = chains(&text);
            let via_match = eval_match_all(&cs, &g).unwrap();
            let plan = stitch_patterns(&cs, crate::algebra::AlgebraExpr::GetVertices).unwrap();
            let via_plan = evaluate(&plan, &g).unwrap();
            assert!(via_match.multiset_eq(&via_plan), "{via_match:?} vs {via_plan:?}");
            assert_eq!(via_match.len(), if age == 32 { 3 } else { 0 });
        }
    }

    #[test]
    fn single_chain_matches_direct_evaluation() {
        let g = Graph::modern();
        let cs = chains("g.V().match(__.as('a').out('knows').as('b'))");
        let direct = evaluate(&cs[0].to_expr(crate::algebra::AlgebraExpr::GetVertices), &g).unwrap();
        assert!(eval_match_all(&cs, &g).unwrap().multiset_eq(&direct));
    }

    #[test]
    fn disconnected_start_is_reported() {
        let g = Graph::modern();
        let cs = chains("g.V().match(__.as('a').out('knows').as('b'), __.as('x').out().as('y'))");
        assert!(matches!(
            eval_match_all(&cs, &g),
            Err(EvalError::UnboundPattern(p)) if p == vec![1]
        ));
    }

    #[test]
    fn single_traverser_entry() {
        let g = Graph::modern();
        let cs = chains("g.V().match(__.as('a').out('knows').as('b'))");
        let marko = g.vertex_by_id("1").unwrap();
        let t = bind(Traverser::at(marko), &Var::new("a")).unwrap();
        let r = eval_match(&cs, &g, t).unwrap();
        assert_eq!(r.len(), 2);
        let r = eval_match(&cs, &g, Traverser::at(marko)).unwrap_err();
        assert!(matches!(r, EvalError::UnboundPattern(_)));
    }
}
