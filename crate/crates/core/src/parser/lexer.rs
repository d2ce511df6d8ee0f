use super::{ParseError, ParseErrorKind, Position};

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// The `__` anonymous-traversal root.
    AnonRoot,
    Dot,
    LParen,
    RParen,
    Comma,
    Str(String),
    Int(i64),
    Float(f64),
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::AnonRoot => "`__`".to_string(),
            TokenKind::Dot => "`.`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Int(_) => "integer literal".to_string(),
            TokenKind::Float(_) => "float literal".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Position,
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> Position {
        Position {
            offset: self.offset,
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }
}

/// Splits query text into tokens. Whitespace (including newlines) separates
/// tokens and is otherwise ignored.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        src: text,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        let kind = match c {
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            '.' => {
                cur.bump();
                TokenKind::Dot
            }
            '(' => {
                cur.bump();
                TokenKind::LParen
            }
            ')' => {
                cur.bump();
                TokenKind::RParen
            }
            ',' => {
                cur.bump();
                TokenKind::Comma
            }
            '"' | '\'' => lex_string(&mut cur, c)?,
            '-' if cur.peek_second().is_some_and(|d| d.is_ascii_digit()) => lex_number(&mut cur)?,
            c if c.is_ascii_digit() => lex_number(&mut cur)?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = cur.offset;
                cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
                let word = &text[start..cur.offset];
                if word == "__" {
                    TokenKind::AnonRoot
                } else {
                    TokenKind::Ident(word.to_string())
                }
            }
            other => {
                return Err(ParseError::new(ParseErrorKind::IllegalCharacter(other), pos));
            }
        };
        tokens.push(Token { kind, pos });
    }
    Ok(tokens)
}

fn lex_string(cur: &mut Cursor<'_>, quote: char) -> Result<TokenKind, ParseError> {
    let start = cur.pos();
    cur.bump();
    let mut out = String::new();
    loop {
        match cur.bump() {
            None => return Err(ParseError::new(ParseErrorKind::UnterminatedString, start)),
            Some('\\') => {
                let esc_pos = cur.pos();
                match cur.bump() {
                    Some(c @ ('\\' | '"' | '\'')) => out.push(c),
                    Some(c) => {
                        return Err(ParseError::new(ParseErrorKind::InvalidEscape(c), esc_pos))
                    }
                    None => {
                        return Err(ParseError::new(ParseErrorKind::UnterminatedString, start))
                    }
                }
            }
            Some(c) if c == quote => return Ok(TokenKind::Str(out)),
            Some(c) => out.push(c),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<TokenKind, ParseError> {
    let start_pos = cur.pos();
    let start = cur.offset;
    if cur.peek() == Some('-') {
        cur.bump();
    }
    cur.eat_while(|c| c.is_ascii_digit());
    let mut is_float = false;
    if cur.peek() == Some('.') && cur.peek_second().is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        cur.bump();
        cur.eat_while(|c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let mut probe = cur.src[cur.offset + 1..].chars();
        let next = probe.next();
        let has_exponent = match next {
            Some(d) if d.is_ascii_digit() => true,
            Some('+' | '-') => probe.next().is_some_and(|d| d.is_ascii_digit()),
            _ => false,
        };
        if has_exponent {
            is_float = true;
            cur.bump();
            if matches!(cur.peek(), Some('+' | '-')) {
                cur.bump();
            }
            cur.eat_while(|c| c.is_ascii_digit());
        }
    }
    let text = &cur.src[start..cur.offset];
    let invalid = || ParseError::new(ParseErrorKind::InvalidNumber(text.to_string()), start_pos);
    if is_float {
        let value: f64 = text.parse().map_err(|_| invalid())?;
        if !value.is_finite() {
            return Err(invalid());
        }
        Ok(TokenKind::Float(value))
    } else {
        text.parse().map(TokenKind::Int).map_err(|_| invalid())
    }
}
