use std::fmt;

use chrono::NaiveDateTime;

use crate::expr::{CmpOp, FloatExpr, IntExpr};
use crate::model::VersionSelector;

/// A source location. Line and column are 1-based and refer to `start`.
///
/// Spans never participate in equality: two ASTs are equal when they have
/// the same structure, wherever in the text they came from.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            end: other.end,
            ..self
        }
    }

    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end.max(self.start + 1)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Ident {
        Ident {
            name: name.into(),
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAst {
    pub model_path: String,
    pub version: VersionSelector,
    pub templates: Vec<TemplateAst>,
    pub outputs: Vec<OutputAst>,
}

impl QueryAst {
    pub fn template(&self, ident: &str) -> Option<&TemplateAst> {
        self.templates.iter().find(|t| t.ident.name == ident)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateAst {
    pub type_name: Ident,
    /// The identifier with any leading `^` removed.
    pub ident: Ident,
    /// Whether the identifier was written with the `^` keyword escape.
    pub escaped: bool,
    pub restrictions: Option<Disjunction>,
    pub span: Span,
}

/// Alternatives joined by `OR`; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Disjunction(pub Vec<Conjunction>);

/// Juxtaposed restrictions that must all hold; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjunction(pub Vec<Restriction>);

#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub negated: bool,
    pub body: RestrictionBody,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RestrictionBody {
    Attr(AttrRestriction),
    Ref(RefRestriction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrRestriction {
    pub name: Ident,
    pub expr: AttrExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefRestriction {
    pub quantifier: Option<Quantifier>,
    pub relation: Ident,
    pub target: Ident,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    ForAll,
    Count(u64),
    Range(u64, u64),
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantifier::Exists => f.write_str("EXISTS"),
            Quantifier::ForAll => f.write_str("FOR_ALL"),
            Quantifier::Count(n) => write!(f, "COUNT({n})"),
            Quantifier::Range(a, b) => write!(f, "RANGE({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrExpr {
    Bool(bool),
    /// A pattern that must match the whole attribute value.
    Regex(String),
    Int(CmpOp, IntExpr),
    Float(CmpOp, FloatExpr),
    Date(CmpOp, NaiveDateTime),
    /// A bare uppercase literal of an Enum attribute.
    Enum(String),
}

impl AttrExpr {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AttrExpr::Bool(_) => "Boolean",
            AttrExpr::Regex(_) => "String",
            AttrExpr::Int(..) => "Int",
            AttrExpr::Float(..) => "Float",
            AttrExpr::Date(..) => "Date",
            AttrExpr::Enum(_) => "Enum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SortDir {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputAst {
    pub template: Ident,
    pub order_by: Vec<(Ident, SortDir)>,
    pub attributes: Option<Vec<Ident>>,
    pub span: Span,
}
