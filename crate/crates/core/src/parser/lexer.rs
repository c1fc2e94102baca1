use std::fmt;

use super::ast::Span;
use super::{ParseError, ParseErrorKind};
use crate::model::parse_date;

/// Reserved words. Keywords are case-sensitive; an identifier that would
/// collide with one is written with a leading `^`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Keyword {
    Model,
    Version,
    First,
    Last,
    List,
    Restrictions,
    Or,
    Not,
    Exists,
    ForAll,
    Count,
    Range,
    Output,
    OrderBy,
    Asc,
    Desc,
    Attribute,
    True,
    False,
}

impl Keyword {
    pub const ALL: [Keyword; 19] = [
        Keyword::Model,
        Keyword::Version,
        Keyword::First,
        Keyword::Last,
        Keyword::List,
        Keyword::Restrictions,
        Keyword::Or,
        Keyword::Not,
        Keyword::Exists,
        Keyword::ForAll,
        Keyword::Count,
        Keyword::Range,
        Keyword::Output,
        Keyword::OrderBy,
        Keyword::Asc,
        Keyword::Desc,
        Keyword::Attribute,
        Keyword::True,
        Keyword::False,
    ];

    pub fn text(self) -> &'static str {
        match self {
            Keyword::Model => "MODEL",
            Keyword::Version => "VERSION",
            Keyword::First => "FIRST",
            Keyword::Last => "LAST",
            Keyword::List => "LIST",
            Keyword::Restrictions => "RESTRICTIONS",
            Keyword::Or => "OR",
            Keyword::Not => "NOT",
            Keyword::Exists => "EXISTS",
            Keyword::ForAll => "FOR_ALL",
            Keyword::Count => "COUNT",
            Keyword::Range => "RANGE",
            Keyword::Output => "OUTPUT",
            Keyword::OrderBy => "ORDER_BY",
            Keyword::Asc => "ASC",
            Keyword::Desc => "DESC",
            Keyword::Attribute => "ATTRIBUTE",
            Keyword::True => "true",
            Keyword::False => "false",
        }
    }

    pub fn from_word(word: &str) -> Option<Keyword> {
        Keyword::ALL.into_iter().find(|k| k.text() == word)
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

pub fn is_keyword(word: &str) -> bool {
    Keyword::from_word(word).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Punct {
    Semi,
    Colon,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

impl Punct {
    pub fn text(self) -> &'static str {
        match self {
            Punct::Semi => ";",
            Punct::Colon => ":",
            Punct::LParen => "(",
            Punct::RParen => ")",
            Punct::Comma => ",",
            Punct::Plus => "+",
            Punct::Minus => "-",
            Punct::Star => "*",
            Punct::Slash => "/",
            Punct::Lt => "<",
            Punct::Le => "<=",
            Punct::Eq => "=",
            Punct::Gt => ">",
            Punct::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident { name: String, escaped: bool },
    Str(String),
    Int(String),
    Float(String),
    Date(String),
    Punct(Punct),
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Keyword(k) => format!("keyword `{k}`"),
            TokenKind::Ident { name, .. } => format!("identifier `{name}`"),
            TokenKind::Str(s) => format!("string '{s}'"),
            TokenKind::Int(s) | TokenKind::Float(s) => format!("number `{s}`"),
            TokenKind::Date(s) => format!("date `{s}`"),
            TokenKind::Punct(p) => format!("`{}`", p.text()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }

    fn close(&self, mut span: Span) -> Span {
        span.end = self.pos;
        span
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.bump();
        }
        &self.text[start..self.pos]
    }
}

/// Position just past the end of `text`.
pub fn end_span(text: &str) -> Span {
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
    Span {
        start: text.len(),
        end: text.len(),
        line,
        column,
    }
}

/// Splits query text into tokens. `//` comments and whitespace are dropped.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        text,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('/') {
            cur.take_while(|c| c != '\n');
            continue;
        }
        let start = cur.mark();
        let kind = if is_word_start(c) {
            let word = cur.take_while(is_word_char);
            match Keyword::from_word(word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident {
                    name: word.to_string(),
                    escaped: false,
                },
            }
        } else if c == '^' {
            cur.bump();
            if !cur.peek().is_some_and(is_word_start) {
                return Err(ParseError::new(
                    ParseErrorKind::IllegalChar('^'),
                    cur.close(start),
                ));
            }
            TokenKind::Ident {
                name: cur.take_while(is_word_char).to_string(),
                escaped: true,
            }
        } else if c.is_ascii_digit() {
            number_or_date(&mut cur, start)?
        } else if c == '\'' || c == '"' {
            string(&mut cur, start, c)?
        } else {
            cur.bump();
            let two = |cur: &mut Cursor, p2: Punct, p1: Punct| {
                if cur.peek() == Some('=') {
                    cur.bump();
                    p2
                } else {
                    p1
                }
            };
            let p = match c {
                ';' => Punct::Semi,
                ':' => Punct::Colon,
                '(' => Punct::LParen,
                ')' => Punct::RParen,
                ',' => Punct::Comma,
                '+' => Punct::Plus,
                '-' => Punct::Minus,
                '*' => Punct::Star,
                '/' => Punct::Slash,
                '=' => Punct::Eq,
                '<' => two(&mut cur, Punct::Le, Punct::Lt),
                '>' => two(&mut cur, Punct::Ge, Punct::Gt),
                other => {
                    return Err(ParseError::new(
                        ParseErrorKind::IllegalChar(other),
                        cur.close(start),
                    ))
                }
            };
            TokenKind::Punct(p)
        };
        tokens.push(Token {
            kind,
            span: cur.close(start),
        });
    }
    Ok(tokens)
}

fn number_or_date(cur: &mut Cursor, start: Span) -> Result<TokenKind, ParseError> {
    let rest = &cur.text[cur.pos..];
    let looks_like_date =
        rest.len() >= 19 && rest.as_bytes()[4] == b'-' && rest.as_bytes()[..4].iter().all(u8::is_ascii_digit);
    if looks_like_date {
        let candidate = &rest[..19];
        for _ in 0..19 {
            cur.bump();
        }
        if parse_date(candidate).is_none() {
            return Err(ParseError::new(
                ParseErrorKind::InvalidLiteral(format!(
                    "`{candidate}` is not a valid YYYY-MM-DDThh:mm:ss date"
                )),
                cur.close(start),
            ));
        }
        return Ok(TokenKind::Date(candidate.to_string()));
    }
    let int_part = cur.take_while(|c| c.is_ascii_digit());
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        cur.bump();
        let frac = cur.take_while(|c| c.is_ascii_digit());
        return Ok(TokenKind::Float(format!("{int_part}.{frac}")));
    }
    Ok(TokenKind::Int(int_part.to_string()))
}

fn string(cur: &mut Cursor, start: Span, quote: char) -> Result<TokenKind, ParseError> {
    cur.bump();
    let mut out = String::new();
    loop {
        match cur.bump() {
            None => {
                return Err(ParseError::new(
                    ParseErrorKind::UnterminatedString,
                    cur.close(start),
                ))
            }
            Some(c) if c == quote => break,
            Some('\\') if cur.peek() == Some(quote) => {
                cur.bump();
                out.push(quote);
            }
            Some(c) => out.push(c),
        }
    }
    Ok(TokenKind::Str(out))
}

/// Quotes a string literal so that [`tokenize`] reads back `content`.
pub fn quote_string(content: &str) -> String {
    let quote = if content.contains('\'') && !content.contains('"') {
        '"'
    } else {
        '\''
    };
    let mut out = String::with_capacity(content.len() + 2);
    out.push(quote);
    for c in content.chars() {
        if c == quote {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(quote);
    out
}

/// Writes an identifier, escaping it if it would lex as a keyword.
pub fn ident_text(name: &str, escaped: bool) -> String {
    if escaped || is_keyword(name) {
        format!("^{name}")
    } else {
        name.to_string()
    }
}
