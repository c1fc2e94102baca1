//! Lexing, parsing, pretty-printing and size metrics for query text.
//!
//! The grammar, informally:
//!
//! ```text
//! query       = "MODEL" string ";" "VERSION" ("FIRST" | "LAST" | cmp intArith) ";"
//!               { "LIST" template ";" } { "OUTPUT" output ";" }
//! template    = typeName ident [ "RESTRICTIONS" ":" disjunction ]
//! disjunction = "(" conjunction ")" { "OR" "(" conjunction ")" }
//! conjunction = member { member }
//! member      = [ "NOT" ] ( attrName attrExpr | [ quantifier ] relName ident )
//! attrExpr    = "true" | "false" | string | cmp arith | cmp date | ENUM_LITERAL
//! quantifier  = "EXISTS" | "FOR_ALL" | "COUNT" "(" int ")" | "RANGE" "(" int "," int ")"
//! output      = ident [ "ORDER_BY" attrName ("ASC"|"DESC") { "," ... } ]
//!                     [ "ATTRIBUTE" attrName { "," attrName } ]
//! ```
//!
//! `name IDENT` is ambiguous between an enum comparison and an unquantified
//! reference. The parser reads an all-uppercase, unescaped second word as an
//! enum literal; the validator re-reads it as a reference when the name turns
//! out to be a relation of the template's class.

mod ast;
mod format;
mod lexer;
mod metrics;

use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use format::format_query;
pub use lexer::{end_span, ident_text, is_keyword, quote_string, tokenize, Keyword, Punct, Token, TokenKind};
pub use metrics::{query_metrics, QueryMetrics};

use crate::expr::{Arith, ArithOp, CmpOp};
use crate::model::{parse_date, VersionSelector};

/// What kind of name an identifier position accepts. Carries enough
/// context for schema-driven completion.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IdentRole {
    TypeName,
    NewTemplate,
    /// Attribute or relation name inside a template of `class`.
    RestrictionName {
        class: String,
    },
    /// Relation name after a quantifier.
    QuantifiedRelation {
        class: String,
    },
    /// After `name` in a restriction: an enum literal or a template identifier.
    ValueOrTemplate {
        class: String,
        name: String,
    },
    /// A template referenced by a relation of `class`.
    TemplateRef {
        class: String,
        relation: String,
    },
    /// A template named by an OUTPUT directive.
    OutputTemplate,
    /// Attribute of the template named in an OUTPUT directive.
    OutputAttribute {
        template: String,
    },
}

impl IdentRole {
    fn describe(&self) -> &'static str {
        match self {
            IdentRole::TypeName => "type name",
            IdentRole::NewTemplate => "template identifier",
            IdentRole::RestrictionName { .. } => "attribute or relation name",
            IdentRole::QuantifiedRelation { .. } => "relation name",
            IdentRole::ValueOrTemplate { .. } => "enum literal or template identifier",
            IdentRole::TemplateRef { .. } | IdentRole::OutputTemplate => "template identifier",
            IdentRole::OutputAttribute { .. } => "attribute name",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expected {
    Keyword(Keyword),
    Punct(Punct),
    Ident(IdentRole),
    Str,
    Int,
    Number,
    Date,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Keyword(Keyword::Restrictions) => f.write_str("`RESTRICTIONS:`"),
            Expected::Keyword(k) => write!(f, "`{k}`"),
            Expected::Punct(p) => write!(f, "`{}`", p.text()),
            Expected::Ident(role) => f.write_str(role.describe()),
            Expected::Str => f.write_str("string"),
            Expected::Int => f.write_str("integer"),
            Expected::Number => f.write_str("number"),
            Expected::Date => f.write_str("date"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnterminatedString,
    IllegalChar(char),
    InvalidLiteral(String),
    Unexpected(String),
    UnexpectedEof,
    MissingHeader,
    MissingOutput,
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    /// Tokens that would have been accepted at `span`.
    pub expected: Vec<Expected>,
    /// True when the error was raised at the end of input.
    pub at_eof: bool,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, span: Span) -> ParseError {
        ParseError {
            kind,
            span,
            expected: Vec::new(),
            at_eof: false,
        }
    }

    pub fn message(&self) -> String {
        let mut msg = match &self.kind {
            ParseErrorKind::UnterminatedString => "unterminated string".to_string(),
            ParseErrorKind::IllegalChar(c) => format!("illegal character `{c}`"),
            ParseErrorKind::InvalidLiteral(m) | ParseErrorKind::Invalid(m) => m.clone(),
            ParseErrorKind::Unexpected(found) => format!("unexpected {found}"),
            ParseErrorKind::UnexpectedEof => "unexpected end of query".to_string(),
            ParseErrorKind::MissingHeader => "query must start with a MODEL header".to_string(),
            ParseErrorKind::MissingOutput => "query must contain at least one OUTPUT directive".to_string(),
        };
        if !self.expected.is_empty() {
            let list: Vec<String> = self.expected.iter().map(ToString::to_string).collect();
            msg.push_str(&format!("; expected {}", list.join(", ")));
        }
        msg
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}: {}", self.span, self.message())
    }
}

/// Parses a complete query.
pub fn parse_query(text: &str) -> Result<QueryAst, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser::new(&tokens, end_span(text));
    p.query()
}

/// The tokens acceptable after `text`, assuming `text` is an incomplete
/// query. Returns `None` when `text` already contains an error before its
/// end, in which case nothing can be appended to fix it.
pub fn expected_at_end(text: &str) -> Option<Vec<Expected>> {
    let tokens = tokenize(text).ok()?;
    let mut p = Parser::new(&tokens, end_span(text));
    match p.query() {
        Ok(_) => Some(p.expected),
        Err(e) if e.at_eof => Some(e.expected),
        Err(_) => None,
    }
}

fn is_enum_literal(word: &str) -> bool {
    word.chars().any(|c| c.is_ascii_uppercase())
        && word
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NumLit {
    Int(i64),
    Float(f64),
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    eof: Span,
    expected: Vec<Expected>,
}

type PResult<T> = Result<T, ParseError>;

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token], eof: Span) -> Parser<'t> {
        Parser {
            tokens,
            pos: 0,
            eof,
            expected: Vec::new(),
        }
    }

    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn span(&self) -> Span {
        self.peek().map_or(self.eof, |t| t.span)
    }

    fn prev_span(&self) -> Span {
        self.pos.checked_sub(1).map_or(self.eof, |i| self.tokens[i].span)
    }

    fn expect_one(&mut self, e: Expected) {
        if !self.expected.contains(&e) {
            self.expected.push(e);
        }
    }

    fn advance(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        self.expected.clear();
        t
    }

    fn error(&mut self, kind: ParseErrorKind, span: Span) -> ParseError {
        ParseError::new(kind, span)
    }

    fn unexpected(&mut self) -> ParseError {
        let expected = std::mem::take(&mut self.expected);
        match self.peek() {
            Some(t) => ParseError {
                kind: ParseErrorKind::Unexpected(t.kind.describe()),
                span: t.span,
                expected,
                at_eof: false,
            },
            None => ParseError {
                kind: ParseErrorKind::UnexpectedEof,
                span: self.eof,
                expected,
                at_eof: true,
            },
        }
    }

    fn at_kw(&mut self, kw: Keyword) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Keyword(k), .. }) if *k == kw) {
            true
        } else {
            self.expect_one(Expected::Keyword(kw));
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        let hit = self.at_kw(kw);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<Span> {
        if self.eat_kw(kw) {
            Ok(self.prev_span())
        } else {
            Err(self.unexpected())
        }
    }

    fn at_punct(&mut self, p: Punct) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Punct(q), .. }) if *q == p) {
            true
        } else {
            self.expect_one(Expected::Punct(p));
            false
        }
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        let hit = self.at_punct(p);
        if hit {
            self.advance();
        }
        hit
    }

    fn expect_punct(&mut self, p: Punct) -> PResult<Span> {
        if self.eat_punct(p) {
            Ok(self.prev_span())
        } else {
            Err(self.unexpected())
        }
    }

    fn at_ident(&mut self, role: IdentRole) -> bool {
        if matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Ident { .. },
                ..
            })
        ) {
            true
        } else {
            self.expect_one(Expected::Ident(role));
            false
        }
    }

    /// Returns the identifier and whether it carried the `^` escape.
    fn ident(&mut self, role: IdentRole) -> PResult<(Ident, bool)> {
        if !self.at_ident(role) {
            return Err(self.unexpected());
        }
        let t = self.advance();
        let TokenKind::Ident { name, escaped } = &t.kind else {
            unreachable!()
        };
        Ok((
            Ident {
                name: name.clone(),
                span: t.span,
            },
            *escaped,
        ))
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Str(s),
                ..
            }) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => {
                self.expect_one(Expected::Str);
                Err(self.unexpected())
            }
        }
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Some(Token {
                kind: TokenKind::Punct(p),
                ..
            }) => match p {
                Punct::Lt => Some(CmpOp::Lt),
                Punct::Le => Some(CmpOp::Le),
                Punct::Eq => Some(CmpOp::Eq),
                Punct::Gt => Some(CmpOp::Gt),
                Punct::Ge => Some(CmpOp::Ge),
                _ => None,
            },
            _ => None,
        };
        match op {
            Some(op) => {
                self.advance();
                Some(op)
            }
            None => {
                for p in [Punct::Le, Punct::Lt, Punct::Eq, Punct::Gt, Punct::Ge] {
                    self.expect_one(Expected::Punct(p));
                }
                None
            }
        }
    }

    fn query(&mut self) -> PResult<QueryAst> {
        if !self.eat_kw(Keyword::Model) {
            let mut err = self.unexpected();
            if !err.at_eof {
                err.kind = ParseErrorKind::MissingHeader;
            }
            return Err(err);
        }
        let model_path = self.string()?;
        if model_path.is_empty() {
            let span = self.prev_span();
            return Err(self.error(
                ParseErrorKind::Invalid("model path must not be empty".into()),
                span,
            ));
        }
        self.expect_punct(Punct::Semi)?;
        self.expect_kw(Keyword::Version)?;
        let version = if self.eat_kw(Keyword::First) {
            VersionSelector::First
        } else if self.eat_kw(Keyword::Last) {
            VersionSelector::Last
        } else if let Some(op) = self.cmp_op() {
            let start = self.span();
            let expr = self.arith()?;
            let rhs = self.int_expr(expr, start)?;
            VersionSelector::Filter { op, rhs }
        } else {
            return Err(self.unexpected());
        };
        self.expect_punct(Punct::Semi)?;

        let mut templates = Vec::new();
        while self.eat_kw(Keyword::List) {
            let start = self.prev_span();
            let mut t = self.template()?;
            self.expect_punct(Punct::Semi)?;
            t.span = start.to(self.prev_span());
            templates.push(t);
        }
        let mut outputs = Vec::new();
        while self.eat_kw(Keyword::Output) {
            let start = self.prev_span();
            let mut o = self.output()?;
            self.expect_punct(Punct::Semi)?;
            o.span = start.to(self.prev_span());
            outputs.push(o);
        }
        if self.peek().is_some() || outputs.is_empty() {
            let mut err = self.unexpected();
            if err.at_eof && outputs.is_empty() {
                err.kind = ParseErrorKind::MissingOutput;
            }
            return Err(err);
        }
        Ok(QueryAst {
            model_path,
            version,
            templates,
            outputs,
        })
    }

    fn template(&mut self) -> PResult<TemplateAst> {
        let (type_name, _) = self.ident(IdentRole::TypeName)?;
        let (ident, escaped) = self.ident(IdentRole::NewTemplate)?;
        let restrictions = if self.eat_kw(Keyword::Restrictions) {
            self.expect_punct(Punct::Colon)?;
            Some(self.disjunction(&type_name.name)?)
        } else {
            None
        };
        Ok(TemplateAst {
            type_name,
            ident,
            escaped,
            restrictions,
            span: Span::default(),
        })
    }

    fn disjunction(&mut self, class: &str) -> PResult<Disjunction> {
        let mut alternatives = vec![self.group(class)?];
        while self.eat_kw(Keyword::Or) {
            alternatives.push(self.group(class)?);
        }
        Ok(Disjunction(alternatives))
    }

    fn group(&mut self, class: &str) -> PResult<Conjunction> {
        self.expect_punct(Punct::LParen)?;
        let mut members = Vec::new();
        while let Some(m) = self.member(class)? {
            members.push(m);
        }
        if members.is_empty() {
            return Err(self.unexpected());
        }
        self.expect_punct(Punct::RParen)?;
        Ok(Conjunction(members))
    }

    fn quantifier(&mut self) -> PResult<Option<Quantifier>> {
        if self.eat_kw(Keyword::Exists) {
            return Ok(Some(Quantifier::Exists));
        }
        if self.eat_kw(Keyword::ForAll) {
            return Ok(Some(Quantifier::ForAll));
        }
        if self.eat_kw(Keyword::Count) {
            self.expect_punct(Punct::LParen)?;
            let n = self.count_literal()?;
            self.expect_punct(Punct::RParen)?;
            return Ok(Some(Quantifier::Count(n)));
        }
        if self.eat_kw(Keyword::Range) {
            self.expect_punct(Punct::LParen)?;
            let lo_span = self.span();
            let lo = self.count_literal()?;
            self.expect_punct(Punct::Comma)?;
            let hi = self.count_literal()?;
            let close = self.expect_punct(Punct::RParen)?;
            if lo > hi {
                return Err(self.error(
                    ParseErrorKind::Invalid(format!("RANGE lower bound {lo} exceeds upper bound {hi}")),
                    lo_span.to(close),
                ));
            }
            return Ok(Some(Quantifier::Range(lo, hi)));
        }
        Ok(None)
    }

    fn count_literal(&mut self) -> PResult<u64> {
        let start = self.span();
        let negative = self.eat_punct(Punct::Minus);
        match self.peek() {
            Some(Token {
                kind: TokenKind::Int(digits),
                span,
            }) => {
                let span = if negative { start.to(*span) } else { *span };
                self.advance();
                if negative {
                    return Err(self.error(
                        ParseErrorKind::Invalid("quantifier bounds must not be negative".into()),
                        span,
                    ));
                }
                digits.parse().map_err(|_| {
                    self.error(
                        ParseErrorKind::InvalidLiteral(format!("`{digits}` is out of range")),
                        span,
                    )
                })
            }
            _ => {
                self.expect_one(Expected::Int);
                Err(self.unexpected())
            }
        }
    }

    fn member(&mut self, class: &str) -> PResult<Option<Restriction>> {
        let start = self.span();
        let negated = self.eat_kw(Keyword::Not);
        if let Some(q) = self.quantifier()? {
            let (relation, _) = self.ident(IdentRole::QuantifiedRelation {
                class: class.to_string(),
            })?;
            let (target, _) = self.ident(IdentRole::TemplateRef {
                class: class.to_string(),
                relation: relation.name.clone(),
            })?;
            return Ok(Some(Restriction {
                negated,
                body: RestrictionBody::Ref(RefRestriction {
                    quantifier: Some(q),
                    relation,
                    target,
                }),
                span: start.to(self.prev_span()),
            }));
        }
        if !self.at_ident(IdentRole::RestrictionName {
            class: class.to_string(),
        }) {
            if negated {
                return Err(self.unexpected());
            }
            return Ok(None);
        }
        let (name, _) = self.ident(IdentRole::RestrictionName {
            class: class.to_string(),
        })?;
        let body = self.restriction_rest(class, name)?;
        Ok(Some(Restriction {
            negated,
            body,
            span: start.to(self.prev_span()),
        }))
    }

    fn restriction_rest(&mut self, class: &str, name: Ident) -> PResult<RestrictionBody> {
        let attr = |expr| {
            Ok(RestrictionBody::Attr(AttrRestriction {
                name: name.clone(),
                expr,
            }))
        };
        if self.eat_kw(Keyword::True) {
            return attr(AttrExpr::Bool(true));
        }
        if self.eat_kw(Keyword::False) {
            return attr(AttrExpr::Bool(false));
        }
        if let Some(Token {
            kind: TokenKind::Str(pattern),
            span,
        }) = self.peek()
        {
            let pattern = pattern.clone();
            let span = *span;
            self.advance();
            if let Err(e) = crate::eval::compile_full_match(&pattern) {
                return Err(self.error(
                    ParseErrorKind::InvalidLiteral(format!("invalid regular expression: {e}")),
                    span,
                ));
            }
            return attr(AttrExpr::Regex(pattern));
        }
        self.expect_one(Expected::Str);
        if let Some(op) = self.cmp_op() {
            if let Some(Token {
                kind: TokenKind::Date(text),
                ..
            }) = self.peek()
            {
                let date = parse_date(text).expect("lexer validated the date");
                self.advance();
                return attr(AttrExpr::Date(op, date));
            }
            self.expect_one(Expected::Date);
            let start = self.span();
            let expr = self.arith()?;
            return attr(self.typed_compare(op, expr, start)?);
        }
        let role = IdentRole::ValueOrTemplate {
            class: class.to_string(),
            name: name.name.clone(),
        };
        let (word, escaped) = self.ident(role)?;
        if !escaped && is_enum_literal(&word.name) {
            return attr(AttrExpr::Enum(word.name));
        }
        Ok(RestrictionBody::Ref(RefRestriction {
            quantifier: None,
            relation: name,
            target: word,
        }))
    }

    fn arith(&mut self) -> PResult<Arith<NumLit>> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_punct(Punct::Plus) {
                ArithOp::Add
            } else if self.eat_punct(Punct::Minus) {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Arith::Binary(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Arith<NumLit>> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat_punct(Punct::Star) {
                ArithOp::Mul
            } else if self.eat_punct(Punct::Slash) {
                ArithOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Arith::Binary(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn factor(&mut self) -> PResult<Arith<NumLit>> {
        if self.eat_punct(Punct::LParen) {
            let inner = self.arith()?;
            self.expect_punct(Punct::RParen)?;
            return Ok(Arith::Group(Box::new(inner)));
        }
        let start = self.span();
        let negative = self.eat_punct(Punct::Minus);
        let sign = if negative { "-" } else { "" };
        let lit = match self.peek() {
            Some(Token {
                kind: TokenKind::Int(digits),
                span,
            }) => {
                let text = format!("{sign}{digits}");
                let value = text.parse::<i64>().map_err(|_| {
                    ParseError::new(
                        ParseErrorKind::InvalidLiteral(format!("integer `{text}` is out of range")),
                        start.to(*span),
                    )
                })?;
                NumLit::Int(value)
            }
            Some(Token {
                kind: TokenKind::Float(digits),
                span,
            }) => {
                let text = format!("{sign}{digits}");
                let value = text
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        ParseError::new(
                            ParseErrorKind::InvalidLiteral(format!("float `{text}` is out of range")),
                            start.to(*span),
                        )
                    })?;
                NumLit::Float(value)
            }
            _ => {
                self.expect_one(Expected::Number);
                return Err(self.unexpected());
            }
        };
        self.advance();
        Ok(Arith::Lit(lit))
    }

    fn typed_compare(&mut self, op: CmpOp, expr: Arith<NumLit>, start: Span) -> PResult<AttrExpr> {
        fn has(e: &Arith<NumLit>, float: bool) -> bool {
            match e {
                Arith::Lit(NumLit::Float(_)) => float,
                Arith::Lit(NumLit::Int(_)) => !float,
                Arith::Group(i) => has(i, float),
                Arith::Binary(l, _, r) => has(l, float) || has(r, float),
            }
        }
        if has(&expr, true) {
            if has(&expr, false) {
                let span = start.to(self.prev_span());
                return Err(self.error(
                    ParseErrorKind::Invalid("cannot mix Int and Float literals in one expression".into()),
                    span,
                ));
            }
            Ok(AttrExpr::Float(
                op,
                map_lits(expr, &|l| match l {
                    NumLit::Float(f) => f,
                    NumLit::Int(_) => unreachable!(),
                }),
            ))
        } else {
            Ok(AttrExpr::Int(
                op,
                map_lits(expr, &|l| match l {
                    NumLit::Int(i) => i,
                    NumLit::Float(_) => unreachable!(),
                }),
            ))
        }
    }

    fn int_expr(&mut self, expr: Arith<NumLit>, start: Span) -> PResult<crate::expr::IntExpr> {
        match self.typed_compare(CmpOp::Eq, expr, start)? {
            AttrExpr::Int(_, e) => Ok(e),
            _ => {
                let span = start.to(self.prev_span());
                Err(self.error(
                    ParseErrorKind::Invalid("version expressions must be integers".into()),
                    span,
                ))
            }
        }
    }

    fn output(&mut self) -> PResult<OutputAst> {
        let (template, _) = self.ident(IdentRole::OutputTemplate)?;
        let role = IdentRole::OutputAttribute {
            template: template.name.clone(),
        };
        let mut order_by: Vec<(Ident, SortDir)> = Vec::new();
        if self.eat_kw(Keyword::OrderBy) {
            loop {
                let (name, _) = self.ident(role.clone())?;
                if order_by.iter().any(|(n, _)| n.name == name.name) {
                    return Err(self.error(
                        ParseErrorKind::Invalid(format!("duplicate ORDER_BY key `{}`", name.name)),
                        name.span,
                    ));
                }
                let dir = if self.eat_kw(Keyword::Asc) {
                    SortDir::Asc
                } else if self.eat_kw(Keyword::Desc) {
                    SortDir::Desc
                } else {
                    return Err(self.unexpected());
                };
                order_by.push((name, dir));
                if !self.eat_punct(Punct::Comma) {
                    break;
                }
            }
        }
        let mut attributes = None;
        if self.eat_kw(Keyword::Attribute) {
            let mut names: Vec<Ident> = Vec::new();
            loop {
                let (name, _) = self.ident(role.clone())?;
                if names.iter().any(|n| n.name == name.name) {
                    return Err(self.error(
                        ParseErrorKind::Invalid(format!("duplicate ATTRIBUTE `{}`", name.name)),
                        name.span,
                    ));
                }
                names.push(name);
                if !self.eat_punct(Punct::Comma) {
                    break;
                }
            }
            attributes = Some(names);
        }
        Ok(OutputAst {
            template,
            order_by,
            attributes,
            span: Span::default(),
        })
    }
}

fn map_lits<T>(e: Arith<NumLit>, f: &dyn Fn(NumLit) -> T) -> Arith<T> {
    match e {
        Arith::Lit(l) => Arith::Lit(f(l)),
        Arith::Group(i) => Arith::Group(Box::new(map_lits(*i, f))),
        Arith::Binary(l, op, r) => Arith::Binary(Box::new(map_lits(*l, f)), op, Box::new(map_lits(*r, f))),
    }
}

#[cfg(test)]
mod tests;
