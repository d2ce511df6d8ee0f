//! Graph algebra expression trees and their textual renderings.
//!
//! An [`AlgebraExpr`] is the compiler's output and the evaluator's input.
//! Three renderers are provided:
//!
//! * [`PlanStyle::Paper`]: operator glyphs (`Π`, `σ`, `↑`, `⊎`, ...) with
//!   consecutive traverse/filter operators written by juxtaposition, e.g.
//!   `Π_{a,c}(σ^c_{age=30} ↓_b^c[created](V_g))`.
//! * [`PlanStyle::Ascii`]: one operator per line, children indented by two
//!   spaces. This form is injective over well-formed trees and is what the
//!   golden plan files contain.
//! * [`PlanStyle::Curried`]: nested single-step application such as
//!   `max(values_age(out_knows(has_name=marko(V_g))))`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;

use crate::graph::{Direction, PropertyValue};
pub use crate::parser::SortOrder;

/// A pattern variable introduced by an `as()` label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Var {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_string())
    }
}

impl From<String> for Var {
    fn from(s: String) -> Self {
        Var(s)
    }
}

impl std::borrow::Borrow<str> for Var {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    fn ascii(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Neq => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    fn glyph(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Neq => "≠",
            Comparator::Lt => "<",
            Comparator::Le => "≤",
            Comparator::Gt => ">",
            Comparator::Ge => "≥",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    Compare(Comparator, PropertyValue),
    /// The key is present on the element.
    Exists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggregateFn {
    Max,
    Min,
    Count,
}

impl AggregateFn {
    pub fn name(self) -> &'static str {
        match self {
            AggregateFn::Max => "max",
            AggregateFn::Min => "min",
            AggregateFn::Count => "count",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortKey {
    /// `None` sorts on the traverser's current location.
    pub var: Option<Var>,
    pub order: SortOrder,
}

/// A single-step operator of a pattern chain, detached from its input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternOp {
    Traverse {
        dir: Direction,
        edge_label: Option<String>,
        from_var: Option<Var>,
        to_var: Option<Var>,
    },
    PropertyFilter {
        var: Option<Var>,
        key: String,
        predicate: Option<Predicate>,
        source: Option<Var>,
    },
    LabelFilter {
        var: Option<Var>,
        label: String,
    },
}

impl PatternOp {
    pub fn wrap(self, input: AlgebraExpr) -> AlgebraExpr {
        let input = Box::new(input);
        match self {
            PatternOp::Traverse {
                dir,
                edge_label,
                from_var,
                to_var,
            } => AlgebraExpr::Traverse {
                dir,
                edge_label,
                from_var,
                to_var,
                input,
            },
            PatternOp::PropertyFilter {
                var,
                key,
                predicate,
                source,
            } => AlgebraExpr::PropertyFilter {
                var,
                key,
                predicate,
                source,
                input,
            },
            PatternOp::LabelFilter { var, label } => AlgebraExpr::LabelFilter { var, label, input },
        }
    }

    /// Variables this operator may bind.
    pub fn vars(&self) -> Vec<&Var> {
        match self {
            PatternOp::Traverse {
                from_var, to_var, ..
            } => from_var.iter().chain(to_var.iter()).collect(),
            PatternOp::PropertyFilter { var, source, .. } => {
                source.iter().chain(var.iter()).collect()
            }
            PatternOp::LabelFilter { var, .. } => var.iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraExpr {
    /// `V_g`: every vertex of the graph.
    GetVertices,
    /// `E_g`: every edge of the graph.
    GetEdges,
    /// `↑`/`↓`: expand along out- or in-edges, optionally of one label.
    Traverse {
        dir: Direction,
        edge_label: Option<String>,
        from_var: Option<Var>,
        to_var: Option<Var>,
        input: Box<AlgebraExpr>,
    },
    /// `σ`: with a predicate, keeps rows whose element satisfies it; without
    /// one, replaces the location with the property value (`values()`),
    /// reading it from `source` when given.
    PropertyFilter {
        var: Option<Var>,
        key: String,
        predicate: Option<Predicate>,
        source: Option<Var>,
        input: Box<AlgebraExpr>,
    },
    LabelFilter {
        var: Option<Var>,
        label: String,
        input: Box<AlgebraExpr>,
    },
    /// `∃(p)`: semi-join (anti-join when negated) against the predicate's
    /// result on the variables both sides share.
    Selection {
        predicate: Box<AlgebraExpr>,
        negated: bool,
        input: Box<AlgebraExpr>,
    },
    Projection {
        vars: Vec<Var>,
        value_key: Option<String>,
        input: Box<AlgebraExpr>,
    },
    /// `δ`: an empty variable list dedups on the current location.
    Dedup {
        vars: Vec<Var>,
        input: Box<AlgebraExpr>,
    },
    /// `λ_l^s`
    Restriction {
        skip: usize,
        take: usize,
        input: Box<AlgebraExpr>,
    },
    Sort {
        keys: Vec<SortKey>,
        input: Box<AlgebraExpr>,
    },
    /// `†`: groups rows by the given property of their elements, or by the
    /// whole row when `key` is `None`.
    Group {
        key: Option<String>,
        input: Box<AlgebraExpr>,
    },
    /// `⋈∘`: natural join on shared variables (cartesian when none are shared).
    Join {
        left: Box<AlgebraExpr>,
        right: Box<AlgebraExpr>,
    },
    /// `⊎`: bag union.
    Union {
        left: Box<AlgebraExpr>,
        right: Box<AlgebraExpr>,
    },
    Aggregate {
        func: AggregateFn,
        input: Box<AlgebraExpr>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlanStyle {
    Paper,
    Ascii,
    Curried,
}

/// A scoping violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub var: Var,
    pub operator: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unbound {} in {}", self.var, self.operator)
    }
}

impl AlgebraExpr {
    /// Detaches a traverse/filter operator from its input.
    pub fn as_pattern_op(&self) -> Option<(PatternOp, &AlgebraExpr)> {
        match self {
            AlgebraExpr::Traverse {
                dir,
                edge_label,
                from_var,
                to_var,
                input,
            } => Some((
                PatternOp::Traverse {
                    dir: *dir,
                    edge_label: edge_label.clone(),
                    from_var: from_var.clone(),
                    to_var: to_var.clone(),
                },
                input,
            )),
            AlgebraExpr::PropertyFilter {
                var,
                key,
                predicate,
                source,
                input,
            } => Some((
                PatternOp::PropertyFilter {
                    var: var.clone(),
                    key: key.clone(),
                    predicate: predicate.clone(),
                    source: source.clone(),
                },
                input,
            )),
            AlgebraExpr::LabelFilter { var, label, input } => Some((
                PatternOp::LabelFilter {
                    var: var.clone(),
                    label: label.clone(),
                },
                input,
            )),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&AlgebraExpr> {
        use AlgebraExpr::*;
        match self {
            GetVertices | GetEdges => vec![],
            Traverse { input, .. }
            | PropertyFilter { input, .. }
            | LabelFilter { input, .. }
            | Projection { input, .. }
            | Dedup { input, .. }
            | Restriction { input, .. }
            | Sort { input, .. }
            | Group { input, .. }
            | Aggregate { input, .. } => vec![input],
            Selection {
                predicate, input, ..
            } => vec![predicate, input],
            Join { left, right } | Union { left, right } => vec![left, right],
        }
    }

    /// Variables carried by rows produced by this expression, in order of
    /// introduction. For a union this is the union of both sides.
    pub fn output_vars(&self) -> Vec<Var> {
        use AlgebraExpr::*;
        match self {
            GetVertices | GetEdges => vec![],
            Traverse { input, .. } | PropertyFilter { input, .. } | LabelFilter { input, .. } => {
                let mut vars = input.output_vars();
                let (op, _) = self.as_pattern_op().expect("pattern operator");
                for v in op.vars() {
                    if !vars.contains(v) {
                        vars.push(v.clone());
                    }
                }
                vars
            }
            Selection { input, .. }
            | Dedup { input, .. }
            | Restriction { input, .. }
            | Sort { input, .. } => input.output_vars(),
            Projection { vars, .. } => vars.clone(),
            Group { .. } => vec![Var::new("key"), Var::new("member")],
            Join { left, right } | Union { left, right } => {
                let mut vars = left.output_vars();
                for v in right.output_vars() {
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
                vars
            }
            Aggregate { .. } => vec![],
        }
    }

    pub fn render(&self, style: PlanStyle) -> String {
        render_plan(self, style)
    }
}

pub fn render_plan(expr: &AlgebraExpr, style: PlanStyle) -> String {
    match style {
        PlanStyle::Ascii => {
            let mut out = String::new();
            render_ascii(expr, 0, &mut out);
            out
        }
        PlanStyle::Paper => render_paper(expr),
        PlanStyle::Curried => render_curried(expr),
    }
}

/// Checks that every variable read by a projection, sort, dedup or selection
/// is introduced beneath it.
pub fn validate(expr: &AlgebraExpr) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    scope_of(expr, &mut diagnostics);
    diagnostics
}

fn scope_of(expr: &AlgebraExpr, diags: &mut Vec<Diagnostic>) -> BTreeSet<Var> {
    use AlgebraExpr::*;
    match expr {
        GetVertices | GetEdges => BTreeSet::new(),
        Traverse { input, .. } | PropertyFilter { input, .. } | LabelFilter { input, .. } => {
            let mut scope = scope_of(input, diags);
            let (op, _) = expr.as_pattern_op().expect("pattern operator");
            scope.extend(op.vars().into_iter().cloned());
            scope
        }
        Selection {
            predicate, input, ..
        } => {
            scope_of(predicate, diags);
            scope_of(input, diags)
        }
        Projection { vars, input, .. } => {
            let scope = scope_of(input, diags);
            require(expr, &scope, vars.iter(), diags);
            vars.iter().cloned().collect()
        }
        Dedup { vars, input } => {
            let scope = scope_of(input, diags);
            require(expr, &scope, vars.iter(), diags);
            scope
        }
        Sort { keys, input } => {
            let scope = scope_of(input, diags);
            require(expr, &scope, keys.iter().filter_map(|k| k.var.as_ref()), diags);
            scope
        }
        Restriction { input, .. } => scope_of(input, diags),
        Group { input, .. } => {
            scope_of(input, diags);
            [Var::new("key"), Var::new("member")].into_iter().collect()
        }
        Aggregate { input, .. } => {
            scope_of(input, diags);
            BTreeSet::new()
        }
        Join { left, right } | Union { left, right } => {
            let mut scope = scope_of(left, diags);
            scope.extend(scope_of(right, diags));
            scope
        }
    }
}

fn require<'a>(
    expr: &AlgebraExpr,
    scope: &BTreeSet<Var>,
    vars: impl Iterator<Item = &'a Var>,
    diags: &mut Vec<Diagnostic>,
) {
    for v in vars {
        if !scope.contains(v) {
            diags.push(Diagnostic {
                var: v.clone(),
                operator: ascii_head(expr),
            });
        }
    }
}

fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "_" | "true" | "false")
}

/// Names are written bare when they look like identifiers and quoted
/// otherwise, so that e.g. the string `"30"` never collides with the integer 30.
fn ascii_name(s: &str) -> String {
    if is_plain_name(s) {
        s.to_string()
    } else {
        quoted(s)
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn ascii_var(v: &Option<Var>) -> String {
    v.as_ref().map_or_else(|| "_".to_string(), |v| ascii_name(v))
}

fn ascii_value(v: &PropertyValue) -> String {
    match v {
        PropertyValue::Str(s) => ascii_name(s),
        other => other.to_string(),
    }
}

fn ascii_key(key: &str) -> String {
    if key == "label" {
        quoted(key)
    } else {
        ascii_name(key)
    }
}

fn join_names<'a>(names: impl Iterator<Item = &'a Var>) -> String {
    names.map(|v| ascii_name(v)).collect::<Vec<_>>().join(",")
}

fn ascii_head(expr: &AlgebraExpr) -> String {
    use AlgebraExpr::*;
    match expr {
        GetVertices => "V".into(),
        GetEdges => "E".into(),
        Traverse {
            dir,
            edge_label,
            from_var,
            to_var,
            ..
        } => {
            let dir = match dir {
                Direction::Out => "out",
                Direction::In => "in",
            };
            let label = edge_label
                .as_ref()
                .map(|l| format!("[{}]", ascii_name(l)))
                .unwrap_or_default();
            format!(
                "traverse-{dir}{label}({}->{})",
                ascii_var(from_var),
                ascii_var(to_var)
            )
        }
        PropertyFilter {
            var,
            key,
            predicate,
            source,
            ..
        } => match predicate {
            Some(Predicate::Compare(cmp, value)) => format!(
                "filter[{}.{}{}{}]",
                ascii_var(var),
                ascii_key(key),
                cmp.ascii(),
                ascii_value(value)
            ),
            Some(Predicate::Exists) => {
                format!("filter[exists {}.{}]", ascii_var(var), ascii_key(key))
            }
            None => {
                let src = source
                    .as_ref()
                    .map(|s| format!("{}.", ascii_name(s)))
                    .unwrap_or_default();
                format!("filter[{}=values {src}{}]", ascii_var(var), ascii_name(key))
            }
        },
        LabelFilter { var, label, .. } => {
            format!("filter[{}.label={}]", ascii_var(var), ascii_name(label))
        }
        Selection { negated, .. } => {
            if *negated {
                "select-where-not".into()
            } else {
                "select-where".into()
            }
        }
        Projection {
            vars, value_key, ..
        } => {
            let mut s = format!("project[{}]", join_names(vars.iter()));
            if let Some(k) = value_key {
                s.push_str(&format!("/values[{}]", ascii_name(k)));
            }
            s
        }
        Dedup { vars, .. } => {
            if vars.is_empty() {
                "dedup[_]".into()
            } else {
                format!("dedup[{}]", join_names(vars.iter()))
            }
        }
        Restriction { skip, take, .. } => format!("limit[skip={skip},take={take}]"),
        Sort { keys, .. } => {
            let keys: Vec<String> = keys
                .iter()
                .map(|k| format!("{} {}", ascii_var(&k.var), k.order.keyword()))
                .collect();
            format!("order[{}]", keys.join(","))
        }
        Group { key, .. } => match key {
            Some(k) => format!("group[{}]", ascii_name(k)),
            None => "group".into(),
        },
        Join { .. } => "join".into(),
        Union { .. } => "union".into(),
        Aggregate { func, .. } => format!("agg[{}]", func.name()),
    }
}

fn render_ascii(expr: &AlgebraExpr, depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push_str(&ascii_head(expr));
    out.push('\n');
    for child in expr.children() {
        render_ascii(child, depth + 1, out);
    }
}

/// Subscript/superscript payload: bare when a single character.
fn sub(s: &str) -> String {
    if s.chars().count() == 1 {
        s.to_string()
    } else {
        format!("{{{s}}}")
    }
}

fn paper_value(v: &PropertyValue) -> String {
    v.to_string()
}

fn paper_pattern_op(op: &PatternOp) -> String {
    let sup = |v: &Option<Var>| v.as_ref().map(|v| format!("^{}", sub(v))).unwrap_or_default();
    match op {
        PatternOp::Traverse {
            dir,
            edge_label,
            from_var,
            to_var,
        } => {
            let arrow = match dir {
                Direction::Out => "↑",
                Direction::In => "↓",
            };
            let from = from_var
                .as_ref()
                .map(|v| format!("_{}", sub(v)))
                .unwrap_or_default();
            let label = edge_label
                .as_ref()
                .map(|l| format!("[{l}]"))
                .unwrap_or_default();
            format!("{arrow}{from}{}{label}", sup(to_var))
        }
        PatternOp::PropertyFilter {
            var,
            key,
            predicate,
            source,
        } => {
            let cond = match predicate {
                Some(Predicate::Compare(cmp, value)) => {
                    format!("{key}{}{}", cmp.glyph(), paper_value(value))
                }
                Some(Predicate::Exists) => format!("∃{key}"),
                None => match source {
                    Some(s) => format!("{s}.{key}"),
                    None => key.clone(),
                },
            };
            format!("σ{}_{}", sup(var), sub(&cond))
        }
        PatternOp::LabelFilter { var, label } => {
            format!("σ{}_{}", sup(var), sub(&format!("label={label}")))
        }
    }
}

fn is_binary(expr: &AlgebraExpr) -> bool {
    matches!(expr, AlgebraExpr::Join { .. } | AlgebraExpr::Union { .. })
}

fn render_paper(expr: &AlgebraExpr) -> String {
    use AlgebraExpr::*;
    let wrap = |head: String, input: &AlgebraExpr| format!("{head}({})", render_paper(input));
    match expr {
        GetVertices => "V_g".into(),
        GetEdges => "E_g".into(),
        Traverse { .. } | PropertyFilter { .. } | LabelFilter { .. } => {
            let mut ops = Vec::new();
            let mut cur = expr;
            while let Some((op, input)) = cur.as_pattern_op() {
                ops.push(paper_pattern_op(&op));
                cur = input;
            }
            format!("{}({})", ops.join(" "), render_paper(cur))
        }
        Selection {
            predicate,
            negated,
            input,
        } => {
            let q = if *negated { "¬∃" } else { "∃" };
            format!("{q}[{}]({})", render_paper(predicate), render_paper(input))
        }
        Projection {
            vars,
            value_key,
            input,
        } => {
            let items: Vec<String> = vars
                .iter()
                .map(|v| match value_key {
                    Some(k) => format!("{v}.{k}"),
                    None => v.to_string(),
                })
                .collect();
            wrap(format!("Π_{}", sub(&items.join(","))), input)
        }
        Dedup { vars, input } => {
            if vars.is_empty() {
                wrap("δ".into(), input)
            } else {
                let names: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
                wrap(format!("δ_{}", sub(&names.join(","))), input)
            }
        }
        Restriction { skip, take, input } => wrap(
            format!("λ_{}^{}", sub(&skip.to_string()), sub(&take.to_string())),
            input,
        ),
        Sort { keys, input } => {
            let keys: Vec<String> = keys
                .iter()
                .map(|k| {
                    let arrow = match k.order {
                        SortOrder::Asc => "⇑",
                        SortOrder::Desc => "⇓",
                    };
                    format!("{arrow}{}", k.var.as_ref().map(Var::as_str).unwrap_or(""))
                })
                .collect();
            wrap(format!("ℜ_{}", sub(&keys.join(","))), input)
        }
        Group { key, input } => match key {
            Some(k) => wrap(format!("†_{}", sub(k)), input),
            None => wrap("†".into(), input),
        },
        Join { left, right } | Union { left, right } => {
            let glyph = if matches!(expr, Join { .. }) {
                "⋈∘"
            } else {
                "⊎"
            };
            let side = |e: &AlgebraExpr| {
                if is_binary(e) {
                    format!("({})", render_paper(e))
                } else {
                    render_paper(e)
                }
            };
            format!("{} {glyph} {}", side(left), side(right))
        }
        Aggregate { func, input } => wrap(func.name().into(), input),
    }
}

fn render_curried(expr: &AlgebraExpr) -> String {
    use AlgebraExpr::*;
    let as_var = |v: &Option<Var>, inner: String| match v {
        Some(v) => format!("as_{v}({inner})"),
        None => inner,
    };
    match expr {
        GetVertices => "V_g".into(),
        GetEdges => "E_g".into(),
        Traverse {
            dir,
            edge_label,
            from_var,
            to_var,
            input,
        } => {
            let step = match dir {
                Direction::Out => "out",
                Direction::In => "in",
            };
            let step = match edge_label {
                Some(l) => format!("{step}_{l}"),
                None => step.to_string(),
            };
            let inner = as_var(from_var, render_curried(input));
            as_var(to_var, format!("{step}({inner})"))
        }
        PropertyFilter {
            var,
            key,
            predicate,
            source,
            input,
        } => match predicate {
            Some(pred) => {
                let cond = match pred {
                    Predicate::Compare(cmp, value) => format!("{key}{}{value}", cmp.ascii()),
                    Predicate::Exists => key.clone(),
                };
                format!("has_{cond}({})", as_var(var, render_curried(input)))
            }
            None => {
                let inner = as_var(source, render_curried(input));
                as_var(var, format!("values_{key}({inner})"))
            }
        },
        LabelFilter { var, label, input } => {
            format!("hasLabel_{label}({})", as_var(var, render_curried(input)))
        }
        Selection {
            predicate,
            negated,
            input,
        } => {
            let step = if *negated { "not" } else { "where" };
            format!(
                "{step}({},{})",
                render_curried(predicate),
                render_curried(input)
            )
        }
        Projection {
            vars,
            value_key,
            input,
        } => {
            let names: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            let select = format!("select_{}({})", names.join(","), render_curried(input));
            match value_key {
                Some(k) => format!("by_{k}({select})"),
                None => select,
            }
        }
        Dedup { vars, input } => {
            let names: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
            if names.is_empty() {
                format!("dedup({})", render_curried(input))
            } else {
                format!("dedup_{}({})", names.join(","), render_curried(input))
            }
        }
        Restriction { skip, take, input } => {
            format!("limit_{skip},{take}({})", render_curried(input))
        }
        Sort { keys, input } => {
            let keys: Vec<String> = keys
                .iter()
                .map(|k| {
                    format!(
                        "{}:{}",
                        k.var.as_ref().map(Var::as_str).unwrap_or(""),
                        k.order.keyword()
                    )
                })
                .collect();
            format!("order_{}({})", keys.join(","), render_curried(input))
        }
        Group { key, input } => match key {
            Some(k) => format!("group_{k}({})", render_curried(input)),
            None => format!("group({})", render_curried(input)),
        },
        Join { left, right } => {
            format!("and({},{})", render_curried(left), render_curried(right))
        }
        Union { left, right } => {
            format!("union({},{})", render_curried(left), render_curried(right))
        }
        Aggregate { func, input } => format!("{}({})", func.name(), render_curried(input)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Option<Var> {
        Some(Var::from(name))
    }

    fn eq7_tree() -> AlgebraExpr {
        let t = PatternOp::Traverse {
            dir: Direction::Out,
            edge_label: Some("created".into()),
            from_var: v("a"),
            to_var: v("b"),
        }
        .wrap(AlgebraExpr::GetVertices);
        let t = PatternOp::PropertyFilter {
            var: v("b"),
            key: "name".into(),
            predicate: Some(Predicate::Compare(Comparator::Eq, "lop".into())),
            source: None,
        }
        .wrap(t);
        let t = PatternOp::Traverse {
            dir: Direction::In,
            edge_label: Some("created".into()),
            from_var: v("b"),
            to_var: v("c"),
        }
        .wrap(t);
        let t = PatternOp::PropertyFilter {
            var: v("c"),
            key: "age".into(),
            predicate: Some(Predicate::Compare(Comparator::Eq, PropertyValue::Int(30))),
            source: None,
        }
        .wrap(t);
        AlgebraExpr::Group {
            key: Some("name".into()),
            input: Box::new(AlgebraExpr::Projection {
                vars: vec!["a".into(), "c".into()],
                value_key: None,
                input: Box::new(t),
            }),
        }
    }

    #[test]
    fn ascii_base_case() {
        assert_eq!(render_plan(&AlgebraExpr::GetVertices, PlanStyle::Ascii), "V\n");
        assert_eq!(render_plan(&AlgebraExpr::GetEdges, PlanStyle::Ascii), "E\n");
    }

    #[test]
    fn ascii_eq7_shape() {
        assert_eq!(
            render_plan(&eq7_tree(), PlanStyle::Ascii),
            "group[name]\n  project[a,c]\n    filter[c.age=30]\n      traverse-in[created](b->c)\n        \
             filter[b.name=lop]\n          traverse-out[created](a->b)\n            V\n"
        );
    }

    #[test]
    fn paper_eq7_shape() {
        assert_eq!(
            render_plan(&eq7_tree(), PlanStyle::Paper),
            "†_{name}(Π_{a,c}(σ^c_{age=30} ↓_b^c[created] σ^b_{name=lop} ↑_a^b[created](V_g)))"
        );
    }

    #[test]
    fn ascii_distinguishes_string_and_integer_constants() {
        let mk = |value: PropertyValue| AlgebraExpr::PropertyFilter {
            var: v("c"),
            key: "age".into(),
            predicate: Some(Predicate::Compare(Comparator::Eq, value)),
            source: None,
            input: Box::new(AlgebraExpr::GetVertices),
        };
        let a = render_plan(&mk(PropertyValue::Int(30)), PlanStyle::Ascii);
        let b = render_plan(&mk(PropertyValue::Str("30".into())), PlanStyle::Ascii);
        assert_ne!(a, b);
        assert_eq!(b.lines().next(), Some("filter[c.age=\"30\"]"));
    }

    #[test]
    fn label_filter_and_label_property_render_differently() {
        let prop = AlgebraExpr::PropertyFilter {
            var: v("a"),
            key: "label".into(),
            predicate: Some(Predicate::Compare(Comparator::Eq, "person".into())),
            source: None,
            input: Box::new(AlgebraExpr::GetVertices),
        };
        let label = AlgebraExpr::LabelFilter {
            var: v("a"),
            label: "person".into(),
            input: Box::new(AlgebraExpr::GetVertices),
        };
        assert_ne!(
            render_plan(&prop, PlanStyle::Ascii),
            render_plan(&label, PlanStyle::Ascii)
        );
    }

    #[test]
    fn validate_reports_unbound_projection() {
        let expr = AlgebraExpr::Projection {
            vars: vec!["a".into()],
            value_key: None,
            input: Box::new(AlgebraExpr::LabelFilter {
                var: v("b"),
                label: "person".into(),
                input: Box::new(AlgebraExpr::GetVertices),
            }),
        };
        let diags = validate(&expr);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].to_string(), "unbound a in project[a]");
    }

    #[test]
    fn validate_accepts_eq7_and_joins() {
        assert!(validate(&eq7_tree()).is_empty());
        let left = PatternOp::Traverse {
            dir: Direction::Out,
            edge_label: None,
            from_var: v("a"),
            to_var: v("b"),
        }
        .wrap(AlgebraExpr::GetVertices);
        let right = PatternOp::Traverse {
            dir: Direction::Out,
            edge_label: None,
            from_var: v("b"),
            to_var: v("c"),
        }
        .wrap(AlgebraExpr::GetVertices);
        let join = AlgebraExpr::Projection {
            vars: vec!["a".into(), "c".into()],
            value_key: None,
            input: Box::new(AlgebraExpr::Join {
                left: Box::new(left),
                right: Box::new(right),
            }),
        };
        assert!(validate(&join).is_empty());
    }

    #[test]
    fn sort_and_dedup_scoping() {
        let expr = AlgebraExpr::Sort {
            keys: vec![SortKey {
                var: v("z"),
                order: SortOrder::Desc,
            }],
            input: Box::new(AlgebraExpr::Dedup {
                vars: vec!["y".into()],
                input: Box::new(AlgebraExpr::GetVertices),
            }),
        };
        let names: Vec<String> = validate(&expr).iter().map(|d| d.var.to_string()).collect();
        assert_eq!(names, vec!["y", "z"]);
    }

    #[test]
    fn output_vars_follow_introduction_order() {
        let t = eq7_tree();
        let AlgebraExpr::Group { input, .. } = &t else {
            unreachable!()
        };
        let AlgebraExpr::Projection { input, .. } = input.as_ref() else {
            unreachable!()
        };
        let names: Vec<String> = input.output_vars().iter().map(|v| v.to_string()).collect();
        assert_eq!(names, vec!["a", "b", "c"]);
    }
}
