//! Translation of a parsed traversal into an [`AlgebraExpr`].
//!
//! The build is bottom-up: `g.V()`/`g.E()` seed the plan, traverse and filter
//! operators are appended for each pattern of a `match()` step, pattern chains
//! are stitched together on their shared labels (falling back to a join when
//! a chain cannot be reached), and `where`/`select`/`dedup`/`order`/`group`/
//! `union`/`limit`/`max` wrap the result in that order of appearance.
//!
//! Inside a chain, each `out()`/`in()`/`values()` moves the traverser to a new
//! location; an `as()` names the location it follows. Every traverse and
//! filter operator records the names of the locations it reads and writes, so
//! chains can be reordered without losing track of where each one starts.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::algebra::{
    validate, AggregateFn, AlgebraExpr, Diagnostic, PatternOp, Predicate, SortKey, SortOrder, Var,
};
use crate::algebra::Comparator;
use crate::graph::{Direction, PropertyValue};
use crate::parser::{Arg, Literal, Position, Step, StepKind, TraversalAst};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompileOptions {
    /// Compile `select(..).by(key)` as a grouping on `key` over the plain
    /// projection instead of extracting `key` from each selected element.
    pub eq7_grouping: bool,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CompileError {
    #[error("{pos}: a match() pattern must start with an as() label")]
    UnanchoredPattern { pos: Position },
    #[error("{pos}: a match() pattern needs at least one step after as()")]
    EmptyPattern { pos: Position },
    #[error("{pos}: match() requires at least one pattern")]
    EmptyMatch { pos: Position },
    #[error("{pos}: match() nested inside a match() pattern is not supported")]
    NestedMatch { pos: Position },
    #[error("{pos}: {step}() references undeclared label `{var}`")]
    UndeclaredVariable {
        step: &'static str,
        var: String,
        pos: Position,
    },
    #[error("{pos}: one location is labeled both `{first}` and `{second}`")]
    MultipleLabels {
        first: String,
        second: String,
        pos: Position,
    },
    #[error("{pos}: `_` is reserved and cannot be used as a label")]
    ReservedLabel { pos: Position },
    #[error("{pos}: {step}() {reason}")]
    Unsupported {
        step: &'static str,
        reason: &'static str,
        pos: Position,
    },
    #[error("expected a root traversal starting with g.V() or g.E()")]
    NotRoot,
    #[error("compiled plan is not well-scoped: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

/// One anonymous traversal of a `match()` step, as single-step operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternChain {
    pub start_var: Option<Var>,
    /// Label of the final location, present only when the chain moves.
    pub end_var: Option<Var>,
    pub ops: Vec<PatternOp>,
}

impl PatternChain {
    /// Applies the chain's operators on top of `input`.
    pub fn to_expr(&self, input: AlgebraExpr) -> AlgebraExpr {
        self.ops
            .iter()
            .cloned()
            .fold(input, |acc, op| op.wrap(acc))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vars: BTreeSet<Var> = self
            .ops
            .iter()
            .flat_map(|op| op.vars().into_iter().cloned())
            .collect();
        vars.extend(self.start_var.iter().cloned());
        vars
    }
}

pub fn compile(ast: &TraversalAst) -> Result<AlgebraExpr, CompileError> {
    compile_with(ast, &CompileOptions::default())
}

pub fn compile_with(ast: &TraversalAst, options: &CompileOptions) -> Result<AlgebraExpr, CompileError> {
    let Some(first) = ast.steps.first() else {
        return Err(CompileError::NotRoot);
    };
    let seed = match (ast.anonymous, first.kind) {
        (false, StepKind::SourceV) => AlgebraExpr::GetVertices,
        (false, StepKind::SourceE) => AlgebraExpr::GetEdges,
        _ => return Err(CompileError::NotRoot),
    };
    let compiler = Compiler { options };
    let state = compiler.steps(&ast.steps[1..], State::new(seed), true)?;
    let diagnostics = validate(&state.expr);
    if diagnostics.is_empty() {
        Ok(state.expr)
    } else {
        Err(CompileError::Invalid(diagnostics))
    }
}

/// Splits a `match()` step into its pattern chains, in source order.
pub fn extract_patterns(step: &Step) -> Result<Vec<PatternChain>, CompileError> {
    if step.kind != StepKind::Match {
        return Err(CompileError::Unsupported {
            step: step.kind.name(),
            reason: "is not a match() step",
            pos: step.pos,
        });
    }
    if step.args.is_empty() {
        return Err(CompileError::EmptyMatch { pos: step.pos });
    }
    let mut chains = Vec::with_capacity(step.args.len());
    for arg in &step.args {
        let Some(pattern) = arg.as_traversal() else {
            return Err(CompileError::Unsupported {
                step: "match",
                reason: "arguments must be anonymous traversals",
                pos: step.pos,
            });
        };
        let Some(head) = pattern.steps.first() else {
            return Err(CompileError::UnanchoredPattern { pos: step.pos });
        };
        if head.kind != StepKind::As {
            return Err(CompileError::UnanchoredPattern { pos: head.pos });
        }
        for s in &pattern.steps {
            match s.kind {
                StepKind::As
                | StepKind::Out
                | StepKind::In
                | StepKind::Has
                | StepKind::HasLabel
                | StepKind::Values => {}
                StepKind::Match => return Err(CompileError::NestedMatch { pos: s.pos }),
                other => {
                    return Err(CompileError::Unsupported {
                        step: other.name(),
                        reason: "cannot appear inside a match() pattern",
                        pos: s.pos,
                    })
                }
            }
        }
        let linear = linear_ops(&pattern.steps, None)?;
        if linear.ops.is_empty() {
            return Err(CompileError::EmptyPattern { pos: head.pos });
        }
        chains.push(PatternChain {
            start_var: linear.labels[0].clone(),
            end_var: if linear.labels.len() > 1 {
                linear.labels.last().cloned().flatten()
            } else {
                None
            },
            ops: linear.ops,
        });
    }
    Ok(chains)
}

/// The label a traverser entering `match()` is bound to: the first start
/// label (in source order) that is not the end label of any chain, or the
/// first chain's start label when every start is also an end.
pub fn match_start_label(chains: &[PatternChain]) -> Option<Var> {
    let ends: BTreeSet<&Var> = chains.iter().filter_map(|c| c.end_var.as_ref()).collect();
    chains
        .iter()
        .filter_map(|c| c.start_var.as_ref())
        .find(|s| !ends.contains(s))
        .or_else(|| chains.first().and_then(|c| c.start_var.as_ref()))
        .cloned()
}

/// Composes pattern chains into one expression over `input`.
///
/// Chains whose start label is bound are threaded greedily, preferring the
/// one with the fewest labels not yet bound (source order breaks ties). The
/// first chain may instead start from the traverser's location, which binds
/// `location_label` (or the computed match start label). A chain that cannot
/// be reached is evaluated from `V_g` and joined on the shared labels.
pub fn stitch_patterns(chains: &[PatternChain], input: AlgebraExpr) -> Result<AlgebraExpr, CompileError> {
    stitch(chains, input, &[], Some(None)).map(|(expr, _)| expr)
}

/// `location_label`: `None` when the input has no usable location, `Some(l)`
/// when it does (with `l` naming it, if an `as()` already did).
fn stitch(
    chains: &[PatternChain],
    input: AlgebraExpr,
    scope: &[Var],
    location_label: Option<Option<Var>>,
) -> Result<(AlgebraExpr, Vec<Var>), CompileError> {
    if chains.is_empty() {
        return Err(CompileError::EmptyMatch {
            pos: Position::default(),
        });
    }
    let mut bound: Vec<Var> = scope.to_vec();
    let mut remaining: Vec<usize> = (0..chains.len()).collect();
    let mut expr = input;

    let unresolved = |i: usize, bound: &[Var]| {
        chains[i]
            .vars()
            .into_iter()
            .filter(|v| !bound.contains(v))
            .count()
    };
    let is_bound = |i: usize, bound: &[Var]| {
        chains[i]
            .start_var
            .as_ref()
            .is_some_and(|s| bound.contains(s))
    };

    let mut entry = match location_label {
        Some(named) if !remaining.iter().any(|&i| is_bound(i, &bound)) => {
            let start = named
                .filter(|n| chains.iter().any(|c| c.start_var.as_ref() == Some(n)))
                .or_else(|| match_start_label(chains));
            start
        }
        _ => None,
    };

    while !remaining.is_empty() {
        let runnable: Vec<usize> = match entry.take() {
            Some(start) => remaining
                .iter()
                .copied()
                .filter(|&i| chains[i].start_var.as_ref() == Some(&start))
                .collect(),
            None => remaining
                .iter()
                .copied()
                .filter(|&i| is_bound(i, &bound))
                .collect(),
        };
        let threaded = !runnable.is_empty();
        let candidates = if threaded { runnable } else { remaining.clone() };
        let pick = candidates
            .into_iter()
            .min_by_key(|&i| (unresolved(i, &bound), i))
            .expect("candidates are non-empty");
        let chain = &chains[pick];
        expr = if threaded {
            chain.to_expr(expr)
        } else {
            AlgebraExpr::Join {
                left: Box::new(expr),
                right: Box::new(chain.to_expr(AlgebraExpr::GetVertices)),
            }
        };
        for v in chain.ops.iter().flat_map(|op| op.vars()) {
            if !bound.contains(v) {
                bound.push(v.clone());
            }
        }
        remaining.retain(|&i| i != pick);
    }
    Ok((expr, bound))
}

struct Linear {
    /// Label of each location visited, starting with the entry location.
    labels: Vec<Option<Var>>,
    ops: Vec<PatternOp>,
}

fn label_arg(step: &Step) -> Result<Var, CompileError> {
    let name = step.args.first().and_then(Arg::as_str).unwrap_or_default();
    if name == "_" {
        return Err(CompileError::ReservedLabel { pos: step.pos });
    }
    Ok(Var::new(name))
}

fn literal_value(lit: &Literal) -> Option<PropertyValue> {
    match lit {
        Literal::Str(s) => Some(PropertyValue::Str(s.clone())),
        Literal::Int(i) => Some(PropertyValue::Int(*i)),
        Literal::Float(x) => Some(PropertyValue::Float(*x)),
        Literal::Bool(b) => Some(PropertyValue::Bool(*b)),
        Literal::Order(_) => None,
    }
}

/// Compiles a run of as/out/in/has/hasLabel/values steps.
fn linear_ops(steps: &[Step], start_label: Option<Var>) -> Result<Linear, CompileError> {
    let mut labels = vec![start_label];
    for step in steps {
        match step.kind {
            StepKind::As => {
                let name = label_arg(step)?;
                let slot = labels.last_mut().expect("non-empty");
                match slot {
                    Some(existing) if *existing != name => {
                        return Err(CompileError::MultipleLabels {
                            first: existing.to_string(),
                            second: name.to_string(),
                            pos: step.pos,
                        })
                    }
                    _ => *slot = Some(name),
                }
            }
            StepKind::Out | StepKind::In | StepKind::Values => labels.push(None),
            _ => {}
        }
    }

    let mut ops = Vec::new();
    let mut seg = 0;
    for step in steps {
        let str_arg = |i: usize| step.args.get(i).and_then(Arg::as_str).map(str::to_string);
        let op = match step.kind {
            StepKind::As => continue,
            StepKind::Out | StepKind::In => {
                seg += 1;
                PatternOp::Traverse {
                    dir: if step.kind == StepKind::Out {
                        Direction::Out
                    } else {
                        Direction::In
                    },
                    edge_label: str_arg(0),
                    from_var: labels[seg - 1].clone(),
                    to_var: labels[seg].clone(),
                }
            }
            StepKind::Has => {
                let predicate = match step.args.get(1) {
                    Some(Arg::Literal(lit)) => {
                        let value = literal_value(lit).ok_or(CompileError::Unsupported {
                            step: "has",
                            reason: "value must be a string, number or boolean",
                            pos: step.pos,
                        })?;
                        Predicate::Compare(Comparator::Eq, value)
                    }
                    _ => Predicate::Exists,
                };
                PatternOp::PropertyFilter {
                    var: labels[seg].clone(),
                    key: str_arg(0).unwrap_or_default(),
                    predicate: Some(predicate),
                    source: None,
                }
            }
            StepKind::HasLabel => PatternOp::LabelFilter {
                var: labels[seg].clone(),
                label: str_arg(0).unwrap_or_default(),
            },
            StepKind::Values => {
                seg += 1;
                PatternOp::PropertyFilter {
                    var: labels[seg].clone(),
                    key: str_arg(0).unwrap_or_default(),
                    predicate: None,
                    source: if ops.is_empty() {
                        labels[seg - 1].clone()
                    } else {
                        None
                    },
                }
            }
            other => {
                return Err(CompileError::Unsupported {
                    step: other.name(),
                    reason: "is not a single-step traversal",
                    pos: step.pos,
                })
            }
        };
        ops.push(op);
    }
    Ok(Linear { labels, ops })
}

#[derive(Clone, Debug, PartialEq)]
enum Loc {
    /// The location carries no label.
    Unlabeled,
    /// The location is the value bound to this label.
    Var(Var),
    /// No single current element (after match() or a multi-label select()).
    Undefined,
}

#[derive(Clone, Debug)]
struct State {
    expr: AlgebraExpr,
    scope: Vec<Var>,
    loc: Loc,
    /// An `as()` label naming the location that no operator has bound yet.
    pending: Option<Var>,
    matched: bool,
}

impl State {
    fn new(seed: AlgebraExpr) -> Self {
        State {
            expr: seed,
            scope: Vec::new(),
            loc: Loc::Unlabeled,
            pending: None,
            matched: false,
        }
    }

    fn extend_scope<'a>(&mut self, vars: impl IntoIterator<Item = &'a Var>) {
        for v in vars {
            if !self.scope.contains(v) {
                self.scope.push(v.clone());
            }
        }
    }

    fn require(&self, step: &Step, var: &str) -> Result<Var, CompileError> {
        let var = Var::new(var);
        if self.scope.contains(&var) {
            Ok(var)
        } else {
            Err(CompileError::UndeclaredVariable {
                step: step.kind.name(),
                var: var.to_string(),
                pos: step.pos,
            })
        }
    }
}

struct Compiler<'o> {
    options: &'o CompileOptions,
}

fn is_linear(kind: StepKind) -> bool {
    matches!(
        kind,
        StepKind::As
            | StepKind::Out
            | StepKind::In
            | StepKind::Has
            | StepKind::HasLabel
            | StepKind::Values
    )
}

impl Compiler<'_> {
    fn steps(&self, steps: &[Step], mut state: State, root: bool) -> Result<State, CompileError> {
        let mut i = 0;
        while i < steps.len() {
            let step = &steps[i];
            if is_linear(step.kind) {
                let end = steps[i..]
                    .iter()
                    .position(|s| !is_linear(s.kind))
                    .map_or(steps.len(), |n| i + n);
                state = self.linear(&steps[i..end], state)?;
                i = end;
                continue;
            }
            let by_end = steps[i + 1..]
                .iter()
                .position(|s| s.kind != StepKind::By)
                .map_or(steps.len(), |n| i + 1 + n);
            let modulators = &steps[i + 1..by_end];
            state = match step.kind {
                StepKind::Match => self.match_step(step, state)?,
                StepKind::Where | StepKind::Not | StepKind::And => self.selection(step, state)?,
                StepKind::Union => self.union(step, state)?,
                StepKind::Select => self.select(step, modulators, state)?,
                StepKind::Dedup => self.dedup(step, state)?,
                StepKind::Order => self.order(step, modulators, state)?,
                StepKind::Group => self.group(step, modulators, state)?,
                StepKind::Limit => {
                    let take = match step.args.first() {
                        Some(Arg::Literal(Literal::Int(n))) if *n >= 0 => *n as usize,
                        _ => {
                            return Err(CompileError::Unsupported {
                                step: "limit",
                                reason: "expects a non-negative integer",
                                pos: step.pos,
                            })
                        }
                    };
                    State {
                        expr: AlgebraExpr::Restriction {
                            skip: 0,
                            take,
                            input: Box::new(state.expr),
                        },
                        ..state
                    }
                }
                StepKind::Max => {
                    if !root || by_end != steps.len() {
                        return Err(CompileError::Unsupported {
                            step: "max",
                            reason: "is only supported as the last step of a root traversal",
                            pos: step.pos,
                        });
                    }
                    if state.loc == Loc::Undefined {
                        return Err(CompileError::Unsupported {
                            step: "max",
                            reason: "needs a single current value; select() one label first",
                            pos: step.pos,
                        });
                    }
                    State {
                        expr: AlgebraExpr::Aggregate {
                            func: AggregateFn::Max,
                            input: Box::new(state.expr),
                        },
                        scope: Vec::new(),
                        loc: Loc::Unlabeled,
                        pending: None,
                        matched: state.matched,
                    }
                }
                StepKind::By => {
                    return Err(CompileError::Unsupported {
                        step: "by",
                        reason: "must follow select(), order() or group()",
                        pos: step.pos,
                    })
                }
                StepKind::SourceV | StepKind::SourceE => {
                    return Err(CompileError::Unsupported {
                        step: step.kind.name(),
                        reason: "may only start a root traversal",
                        pos: step.pos,
                    })
                }
                _ => unreachable!("linear steps handled above"),
            };
            i = by_end;
        }
        Ok(state)
    }

    fn linear(&self, steps: &[Step], mut state: State) -> Result<State, CompileError> {
        let start = match &state.loc {
            Loc::Undefined => {
                let step = &steps[0];
                return Err(CompileError::Unsupported {
                    step: step.kind.name(),
                    reason: "needs a current element; select() a single label first",
                    pos: step.pos,
                });
            }
            Loc::Var(v) => Some(v.clone()),
            Loc::Unlabeled => state.pending.take(),
        };
        let linear = linear_ops(steps, start)?;
        if linear.ops.is_empty() {
            state.pending = linear.labels[0].clone();
            if let Some(p) = &state.pending {
                if state.scope.contains(p) {
                    state.loc = Loc::Var(p.clone());
                    state.pending = None;
                }
            }
            return Ok(state);
        }
        for op in &linear.ops {
            state.extend_scope(op.vars());
        }
        state.loc = match linear.labels.last().cloned().flatten() {
            Some(v) => Loc::Var(v),
            None => Loc::Unlabeled,
        };
        state.expr = linear
            .ops
            .into_iter()
            .fold(state.expr, |acc, op| op.wrap(acc));
        Ok(state)
    }

    fn match_step(&self, step: &Step, mut state: State) -> Result<State, CompileError> {
        let chains = extract_patterns(step)?;
        if state.matched || state.loc == Loc::Undefined {
            let (block, vars) = stitch(&chains, AlgebraExpr::GetVertices, &[], Some(None))?;
            state.expr = AlgebraExpr::Join {
                left: Box::new(state.expr),
                right: Box::new(block),
            };
            state.extend_scope(vars.iter());
        } else {
            let location = match &state.loc {
                Loc::Var(v) => Some(v.clone()),
                _ => state.pending.take(),
            };
            let (expr, vars) = stitch(&chains, state.expr, &state.scope, Some(location))?;
            state.expr = expr;
            state.extend_scope(vars.iter());
        }
        state.loc = Loc::Undefined;
        state.pending = None;
        state.matched = true;
        Ok(state)
    }

    fn nested(&self, traversal: &TraversalAst, input: AlgebraExpr) -> Result<State, CompileError> {
        self.steps(&traversal.steps, State::new(input), false)
    }

    fn selection(&self, step: &Step, state: State) -> Result<State, CompileError> {
        let mut predicates = Vec::new();
        for arg in &step.args {
            let Some(t) = arg.as_traversal() else {
                return Err(CompileError::Unsupported {
                    step: step.kind.name(),
                    reason: "expects anonymous traversals",
                    pos: step.pos,
                });
            };
            let compiled = self.nested(t, AlgebraExpr::GetVertices)?;
            predicates.push(compiled.expr);
        }
        let predicate = predicates
            .into_iter()
            .reduce(|left, right| AlgebraExpr::Join {
                left: Box::new(left),
                right: Box::new(right),
            })
            .ok_or(CompileError::Unsupported {
                step: step.kind.name(),
                reason: "expects at least one traversal",
                pos: step.pos,
            })?;
        let shared = predicate
            .output_vars()
            .iter()
            .any(|v| state.scope.contains(v));
        if !shared {
            return Err(CompileError::Unsupported {
                step: step.kind.name(),
                reason: "traversal shares no labels with the incoming traversal",
                pos: step.pos,
            });
        }
        Ok(State {
            expr: AlgebraExpr::Selection {
                predicate: Box::new(predicate),
                negated: step.kind == StepKind::Not,
                input: Box::new(state.expr),
            },
            ..state
        })
    }

    fn union(&self, step: &Step, state: State) -> Result<State, CompileError> {
        let mut branches = Vec::new();
        for arg in &step.args {
            let Some(t) = arg.as_traversal() else {
                return Err(CompileError::Unsupported {
                    step: "union",
                    reason: "expects anonymous traversals",
                    pos: step.pos,
                });
            };
            branches.push(self.steps(&t.steps, state.clone(), false)?);
        }
        let mut iter = branches.into_iter();
        let first = iter.next().ok_or(CompileError::Unsupported {
            step: "union",
            reason: "expects at least one traversal",
            pos: step.pos,
        })?;
        let mut merged = first;
        for branch in iter {
            merged.expr = AlgebraExpr::Union {
                left: Box::new(merged.expr),
                right: Box::new(branch.expr),
            };
            let branch_scope = branch.scope.clone();
            merged.extend_scope(branch_scope.iter());
            if merged.loc != branch.loc {
                merged.loc = Loc::Undefined;
            }
            merged.matched |= branch.matched;
            if merged.pending != branch.pending {
                merged.pending = None;
            }
        }
        Ok(merged)
    }

    fn select(&self, step: &Step, modulators: &[Step], state: State) -> Result<State, CompileError> {
        let vars = step
            .args
            .iter()
            .map(|a| state.require(step, a.as_str().unwrap_or_default()))
            .collect::<Result<Vec<_>, _>>()?;
        let value_key = match modulators {
            [] => None,
            [by] => match by.args.as_slice() {
                [] => None,
                [Arg::Literal(Literal::Str(key))] => Some(key.clone()),
                _ => {
                    return Err(CompileError::Unsupported {
                        step: "by",
                        reason: "after select() takes a single property key",
                        pos: by.pos,
                    })
                }
            },
            [_, extra, ..] => {
                return Err(CompileError::Unsupported {
                    step: "by",
                    reason: "may be given at most once after select()",
                    pos: extra.pos,
                })
            }
        };
        let loc = match vars.as_slice() {
            [single] => Loc::Var(single.clone()),
            _ => Loc::Undefined,
        };
        let (expr, scope, loc) = match value_key {
            Some(key) if self.options.eq7_grouping => {
                let projection = AlgebraExpr::Projection {
                    vars,
                    value_key: None,
                    input: Box::new(state.expr),
                };
                (
                    AlgebraExpr::Group {
                        key: Some(key),
                        input: Box::new(projection),
                    },
                    vec![Var::new("key"), Var::new("member")],
                    Loc::Undefined,
                )
            }
            value_key => (
                AlgebraExpr::Projection {
                    vars: vars.clone(),
                    value_key,
                    input: Box::new(state.expr),
                },
                vars,
                loc,
            ),
        };
        Ok(State {
            expr,
            scope,
            loc,
            pending: None,
            matched: state.matched,
        })
    }

    fn dedup(&self, step: &Step, state: State) -> Result<State, CompileError> {
        let vars = if step.args.is_empty() {
            match &state.loc {
                Loc::Unlabeled => Vec::new(),
                Loc::Var(v) => vec![v.clone()],
                Loc::Undefined => state.scope.clone(),
            }
        } else {
            step.args
                .iter()
                .map(|a| state.require(step, a.as_str().unwrap_or_default()))
                .collect::<Result<Vec<_>, _>>()?
        };
        Ok(State {
            expr: AlgebraExpr::Dedup {
                vars,
                input: Box::new(state.expr),
            },
            ..state
        })
    }

    fn order(&self, step: &Step, modulators: &[Step], state: State) -> Result<State, CompileError> {
        let default_var = || -> Result<Option<Var>, CompileError> {
            match &state.loc {
                Loc::Unlabeled => Ok(None),
                Loc::Var(v) => Ok(Some(v.clone())),
                Loc::Undefined => match state.scope.as_slice() {
                    [single] => Ok(Some(single.clone())),
                    _ => Err(CompileError::Unsupported {
                        step: "order",
                        reason: "needs by(label) when several labels are in scope",
                        pos: step.pos,
                    }),
                },
            }
        };
        let mut keys = Vec::new();
        if modulators.is_empty() {
            keys.push(SortKey {
                var: default_var()?,
                order: SortOrder::Asc,
            });
        }
        for by in modulators {
            let key = match by.args.as_slice() {
                [] => SortKey {
                    var: default_var()?,
                    order: SortOrder::Asc,
                },
                [Arg::Literal(Literal::Order(order))] => SortKey {
                    var: default_var()?,
                    order: *order,
                },
                [Arg::Literal(Literal::Str(label))] => SortKey {
                    var: Some(state.require(by, label)?),
                    order: SortOrder::Asc,
                },
                [Arg::Literal(Literal::Str(label)), Arg::Literal(Literal::Order(order))] => SortKey {
                    var: Some(state.require(by, label)?),
                    order: *order,
                },
                _ => {
                    return Err(CompileError::Unsupported {
                        step: "by",
                        reason: "after order() takes a label and/or asc|desc",
                        pos: by.pos,
                    })
                }
            };
            keys.push(key);
        }
        Ok(State {
            expr: AlgebraExpr::Sort {
                keys,
                input: Box::new(state.expr),
            },
            ..state
        })
    }

    fn group(&self, step: &Step, modulators: &[Step], state: State) -> Result<State, CompileError> {
        let key = match modulators {
            [] => None,
            [by] => match by.args.as_slice() {
                [] => None,
                [Arg::Literal(Literal::Str(key))] => Some(key.clone()),
                _ => {
                    return Err(CompileError::Unsupported {
                        step: "by",
                        reason: "after group() takes a single property key",
                        pos: by.pos,
                    })
                }
            },
            [_, extra, ..] => {
                return Err(CompileError::Unsupported {
                    step: "by",
                    reason: "may be given at most once after group()",
                    pos: extra.pos,
                })
            }
        };
        let _ = step;
        Ok(State {
            expr: AlgebraExpr::Group {
                key,
                input: Box::new(state.expr),
            },
            scope: vec![Var::new("key"), Var::new("member")],
            loc: Loc::Undefined,
            pending: None,
            matched: state.matched,
        })
    }
}
