//! Parser for the declarative (`match()`-based) subset of Gremlin.
//!
//! The grammar is a fluent method chain:
//!
//! ```text
//! traversal := ("g" | "__") ("." step)+
//! step      := IDENT "(" [arg ("," arg)*] ")"
//! arg       := literal | traversal
//! literal   := STRING | INT | FLOAT | "true" | "false" | "asc" | "desc"
//! ```
//!
//! Root traversals start with `g.V()` or `g.E()`; nested traversals passed
//! to `match`, `union`, `where`, `not` and `and` must be anonymous (`__`).

mod ast;
mod lexer;

use std::fmt;

use thiserror::Error;

pub use ast::{Arg, Literal, SortOrder, Step, StepKind, TraversalAst};
pub use lexer::{tokenize, Token, TokenKind};

/// A location in the query text. Lines and columns are 1-based; columns count
/// characters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("illegal character {0:?}")]
    IllegalCharacter(char),
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("invalid escape sequence `\\{0}`")]
    InvalidEscape(char),
    #[error("invalid number literal `{0}`")]
    InvalidNumber(String),
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown step `{0}`")]
    UnknownStep(String),
    #[error("{step}() expects {expected}")]
    Arity {
        step: &'static str,
        expected: &'static str,
    },
    #[error("{step}() {reason}")]
    InvalidArgument {
        step: &'static str,
        reason: &'static str,
    },
    #[error("by() must follow select(), order() or group()")]
    DanglingBy,
    #[error("traversals nested in {0}() must be anonymous (start with `__`)")]
    NonAnonymousNested(&'static str),
    #[error("{0}() may only start a root traversal")]
    MisplacedSource(&'static str),
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: Position,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, position: Position) -> Self {
        ParseError { kind, position }
    }
}

/// Parses a query into a traversal AST.
pub fn parse_traversal(text: &str) -> Result<TraversalAst, ParseError> {
    let tokens = tokenize(text)?;
    let end = end_position(text);
    let mut parser = Parser {
        tokens: &tokens,
        idx: 0,
        end,
    };
    let traversal = parser.traversal()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::new(
            ParseErrorKind::Unexpected {
                expected: "end of input".into(),
                found: tok.kind.describe(),
            },
            tok.pos,
        ));
    }
    if traversal.anonymous {
        let pos = tokens.first().map(|t| t.pos).unwrap_or_default();
        return Err(ParseError::new(
            ParseErrorKind::Unexpected {
                expected: "`g`".into(),
                found: "`__`".into(),
            },
            pos,
        ));
    }
    Ok(traversal)
}

/// Like [`parse_traversal`] but accepts raw bytes; invalid UTF-8 is reported
/// at the first offending byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<TraversalAst, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_traversal(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            Err(ParseError::new(ParseErrorKind::InvalidUtf8, end_position(valid)))
        }
    }
}

fn end_position(text: &str) -> Position {
    let mut line = 1;
    let mut column = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    Position {
        offset: text.len(),
        line,
        column,
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    idx: usize,
    end: Position,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.idx)
    }

    fn here(&self) -> Position {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        let found = self
            .peek()
            .map(|t| t.kind.describe())
            .unwrap_or_else(|| "end of input".to_string());
        Err(ParseError::new(
            ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found,
            },
            self.here(),
        ))
    }

    fn expect(&mut self, kind: &TokenKind, expected: &str) -> Result<Position, ParseError> {
        match self.peek() {
            Some(tok) if &tok.kind == kind => {
                self.idx += 1;
                Ok(tok.pos)
            }
            _ => self.unexpected(expected),
        }
    }

    fn traversal(&mut self) -> Result<TraversalAst, ParseError> {
        let anonymous = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::AnonRoot) => true,
            Some(TokenKind::Ident(name)) if name == "g" => false,
            _ => return self.unexpected("`g` or `__`"),
        };
        self.idx += 1;
        let mut steps = Vec::new();
        loop {
            self.expect(&TokenKind::Dot, "`.`")?;
            let step = self.step()?;
            match step.kind {
                StepKind::SourceV | StepKind::SourceE => {
                    if anonymous || !steps.is_empty() {
                        return Err(ParseError::new(
                            ParseErrorKind::MisplacedSource(step.kind.name()),
                            step.pos,
                        ));
                    }
                }
                _ if !anonymous && steps.is_empty() => {
                    return Err(ParseError::new(
                        ParseErrorKind::Unexpected {
                            expected: "`V` or `E`".into(),
                            found: format!("step `{}`", step.kind.name()),
                        },
                        step.pos,
                    ));
                }
                StepKind::By => {
                    let anchored = steps.iter().rev().map(|s: &Step| s.kind).find(|k| *k != StepKind::By);
                    if !matches!(
                        anchored,
                        Some(StepKind::Select | StepKind::Order | StepKind::Group)
                    ) {
                        return Err(ParseError::new(ParseErrorKind::DanglingBy, step.pos));
                    }
                }
                _ => {}
            }
            steps.push(step);
            if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Dot)) {
                break;
            }
        }
        Ok(TraversalAst { anonymous, steps })
    }

    fn step(&mut self) -> Result<Step, ParseError> {
        let (name, pos) = match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(name),
                pos,
            }) => (name, *pos),
            _ => return self.unexpected("step name"),
        };
        let kind = StepKind::from_name(name)
            .ok_or_else(|| ParseError::new(ParseErrorKind::UnknownStep(name.clone()), pos))?;
        self.idx += 1;
        self.expect(&TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::RParen)) {
            loop {
                args.push(self.arg(kind)?);
                match self.peek().map(|t| &t.kind) {
                    Some(TokenKind::Comma) => self.idx += 1,
                    _ => break,
                }
            }
        }
        self.expect(&TokenKind::RParen, "`,` or `)`")?;
        check_args(kind, &args).map_err(|k| ParseError::new(k, pos))?;
        Ok(Step { kind, args, pos })
    }

    fn arg(&mut self, step: StepKind) -> Result<Arg, ParseError> {
        let Some(tok) = self.peek() else {
            return self.unexpected("argument");
        };
        let lit = match &tok.kind {
            TokenKind::Str(s) => Literal::Str(s.clone()),
            TokenKind::Int(i) => Literal::Int(*i),
            TokenKind::Float(x) => Literal::Float(*x),
            TokenKind::Ident(word) => match word.as_str() {
                "true" => Literal::Bool(true),
                "false" => Literal::Bool(false),
                "asc" => Literal::Order(SortOrder::Asc),
                "desc" => Literal::Order(SortOrder::Desc),
                "g" => {
                    self.traversal()?;
                    let kind = if step.takes_traversals() {
                        ParseErrorKind::NonAnonymousNested(step.name())
                    } else {
                        ParseErrorKind::InvalidArgument {
                            step: step.name(),
                            reason: "does not take traversal arguments",
                        }
                    };
                    return Err(ParseError::new(kind, tok.pos));
                }
                _ => return self.unexpected("literal or traversal"),
            },
            TokenKind::AnonRoot => return self.traversal().map(Arg::Traversal),
            _ => return self.unexpected("argument"),
        };
        self.idx += 1;
        Ok(Arg::Literal(lit))
    }
}

fn check_args(kind: StepKind, args: &[Arg]) -> Result<(), ParseErrorKind> {
    use StepKind::*;
    let name = kind.name();
    let arity = |expected: &'static str| ParseErrorKind::Arity {
        step: name,
        expected,
    };
    let invalid = |reason: &'static str| ParseErrorKind::InvalidArgument { step: name, reason };
    let all_strings = || args.iter().all(|a| a.as_str().is_some());
    let all_traversals = || args.iter().all(|a| a.as_traversal().is_some());

    if !kind.takes_traversals() && args.iter().any(|a| a.as_traversal().is_some()) {
        return Err(invalid("does not take traversal arguments"));
    }
    match kind {
        SourceV | SourceE | Order | Group | Max => {
            if !args.is_empty() {
                return Err(arity("no arguments"));
            }
        }
        Match | Union | And => {
            if args.is_empty() {
                return Err(arity("at least one traversal"));
            }
            if !all_traversals() {
                return Err(invalid("arguments must be anonymous traversals"));
            }
        }
        Where | Not => {
            if args.len() != 1 {
                return Err(arity("exactly one traversal"));
            }
            if !all_traversals() {
                return Err(invalid("argument must be an anonymous traversal"));
            }
        }
        As | HasLabel | Values => {
            if args.len() != 1 {
                return Err(arity("exactly one argument"));
            }
            if !all_strings() {
                return Err(invalid("argument must be a string"));
            }
        }
        Out | In => {
            if args.len() > 1 {
                return Err(arity("at most one edge label"));
            }
            if !all_strings() {
                return Err(invalid("edge label must be a string"));
            }
        }
        Has => match args {
            [key] if key.as_str().is_some() => {}
            [key, Arg::Literal(value)] if key.as_str().is_some() => {
                if matches!(value, Literal::Order(_)) {
                    return Err(invalid("value must be a string, number or boolean"));
                }
            }
            [_] | [_, _] => return Err(invalid("key must be a string")),
            _ => return Err(arity("a key and an optional value")),
        },
        Select => {
            if args.is_empty() {
                return Err(arity("at least one label"));
            }
            if !all_strings() {
                return Err(invalid("labels must be strings"));
            }
        }
        Dedup => {
            if !all_strings() {
                return Err(invalid("labels must be strings"));
            }
        }
        By => match args {
            [] => {}
            [Arg::Literal(Literal::Str(_) | Literal::Order(_))] => {}
            [Arg::Literal(Literal::Str(_)), Arg::Literal(Literal::Order(_))] => {}
            [_] | [_, _] => return Err(invalid("expects a key and/or asc|desc")),
            _ => return Err(arity("at most two arguments")),
        },
        Limit => match args {
            [Arg::Literal(Literal::Int(n))] if *n >= 0 => {}
            [_] => return Err(invalid("expects a non-negative integer")),
            _ => return Err(arity("exactly one argument")),
        },
    }
    Ok(())
}
