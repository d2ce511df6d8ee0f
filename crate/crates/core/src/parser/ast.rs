use std::fmt;

use super::Position;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SortOrder {
    Asc,
    Desc,
}

impl SortOrder {
    pub fn keyword(self) -> &'static str {
        match self {
            SortOrder::Asc => "asc",
            SortOrder::Desc => "desc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    SourceV,
    SourceE,
    Match,
    As,
    Out,
    In,
    Has,
    HasLabel,
    Values,
    Where,
    Select,
    By,
    Dedup,
    Order,
    Group,
    Limit,
    Union,
    Not,
    And,
    Max,
}

impl StepKind {
    pub const ALL: [StepKind; 20] = [
        StepKind::SourceV,
        StepKind::SourceE,
        StepKind::Match,
        StepKind::As,
        StepKind::Out,
        StepKind::In,
        StepKind::Has,
        StepKind::HasLabel,
        StepKind::Values,
        StepKind::Where,
        StepKind::Select,
        StepKind::By,
        StepKind::Dedup,
        StepKind::Order,
        StepKind::Group,
        StepKind::Limit,
        StepKind::Union,
        StepKind::Not,
        StepKind::And,
        StepKind::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepKind::SourceV => "V",
            StepKind::SourceE => "E",
            StepKind::Match => "match",
            StepKind::As => "as",
            StepKind::Out => "out",
            StepKind::In => "in",
            StepKind::Has => "has",
            StepKind::HasLabel => "hasLabel",
            StepKind::Values => "values",
            StepKind::Where => "where",
            StepKind::Select => "select",
            StepKind::By => "by",
            StepKind::Dedup => "dedup",
            StepKind::Order => "order",
            StepKind::Group => "group",
            StepKind::Limit => "limit",
            StepKind::Union => "union",
            StepKind::Not => "not",
            StepKind::And => "and",
            StepKind::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<StepKind> {
        StepKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Steps whose arguments may be nested anonymous traversals.
    pub fn takes_traversals(self) -> bool {
        matches!(
            self,
            StepKind::Match | StepKind::Union | StepKind::Where | StepKind::Not | StepKind::And
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Order(SortOrder),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Literal(Literal),
    Traversal(TraversalAst),
}

impl Arg {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Arg::Literal(Literal::Str(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_traversal(&self) -> Option<&TraversalAst> {
        match self {
            Arg::Traversal(t) => Some(t),
            _ => None,
        }
    }
}

/// One step of a traversal. Equality ignores the source position.
#[derive(Clone, Debug)]
pub struct Step {
    pub kind: StepKind,
    pub args: Vec<Arg>,
    pub pos: Position,
}

impl Step {
    pub fn new(kind: StepKind, args: Vec<Arg>) -> Self {
        Step {
            kind,
            args,
            pos: Position::default(),
        }
    }
}

impl PartialEq for Step {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.args == other.args
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraversalAst {
    /// True when rooted at `__`.
    pub anonymous: bool,
    pub steps: Vec<Step>,
}

impl TraversalAst {
    /// Canonical text: double-quoted strings and no whitespace.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Float(x) => write!(f, "{x:?}"),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Order(o) => f.write_str(o.keyword()),
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Literal(l) => l.fmt(f),
            Arg::Traversal(t) => t.fmt(f),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.name())?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            arg.fmt(f)?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for TraversalAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.anonymous { "__" } else { "g" })?;
        for step in &self.steps {
            write!(f, ".{step}")?;
        }
        Ok(())
    }
}
