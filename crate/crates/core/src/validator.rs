//! Static checks of a parsed query against a schema.
//!
//! All problems are collected in a single pass. A successful validation
//! yields a [`ValidatedQuery`] in which every name is resolved, every
//! arithmetic expression is folded to a constant, and templates carry an
//! evaluation order.

use std::fmt;

use chrono::NaiveDateTime;
use regex::Regex;
use serde_json::{json, Value};

use crate::eval::compile_full_match;
use crate::expr::CmpOp;
use crate::metamodel::{AttrType, Relation, Schema, UpperBound};
use crate::model::VersionSelector;
use crate::parser::{AttrExpr, Ident, Quantifier, QueryAst, RestrictionBody, SortDir, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Stable kebab-case identifier, e.g. `unknown-attribute`.
    pub code: &'static str,
    pub message: String,
    pub span: Span,
    /// The template the problem belongs to, if any.
    pub template: Option<String>,
}

impl Diagnostic {
    /// `severity file:line:col code message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{} {}:{}:{} {} {}",
            self.severity, file, self.span.line, self.span.column, self.code, self.message
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "severity": self.severity.to_string(),
            "code": self.code,
            "message": self.message,
            "line": self.span.line,
            "column": self.span.column,
            "start": self.span.start,
            "end": self.span.end,
            "template": self.template,
        })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.severity, self.span, self.code, self.message
        )
    }
}

/// A relation as seen by the evaluator: the chain of reference names to
/// follow from the source element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedRelation {
    pub name: String,
    pub path: Vec<String>,
    pub target_class: String,
    pub upper_bound: UpperBound,
    pub is_shortcut: bool,
}

impl From<Relation<'_>> for ResolvedRelation {
    fn from(r: Relation<'_>) -> Self {
        ResolvedRelation {
            name: r.name().to_string(),
            path: r.path().into_iter().map(String::from).collect(),
            target_class: r.target().to_string(),
            upper_bound: r.upper_bound(),
            is_shortcut: r.is_shortcut(),
        }
    }
}

/// An attribute test with its right-hand side already evaluated.
#[derive(Debug, Clone)]
pub enum Predicate {
    Bool(bool),
    Regex { pattern: String, regex: Regex },
    Int(CmpOp, i64),
    Float(CmpOp, f64),
    Date(CmpOp, NaiveDateTime),
    Enum(String),
}

impl PartialEq for Predicate {
    fn eq(&self, other: &Self) -> bool {
        use Predicate::*;
        match (self, other) {
            (Bool(a), Bool(b)) => a == b,
            (Regex { pattern: a, .. }, Regex { pattern: b, .. }) => a == b,
            (Int(o1, a), Int(o2, b)) => o1 == o2 && a == b,
            (Float(o1, a), Float(o2, b)) => o1 == o2 && a.to_bits() == b.to_bits(),
            (Date(o1, a), Date(o2, b)) => o1 == o2 && a == b,
            (Enum(a), Enum(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Test {
    Attr {
        attribute: String,
        predicate: Predicate,
    },
    Ref {
        relation: ResolvedRelation,
        quantifier: Option<Quantifier>,
        /// Index of the referenced template.
        target: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRestriction {
    pub negated: bool,
    pub test: Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTemplate {
    pub ident: String,
    pub class: String,
    /// Alternatives of conjunctions; `None` matches the whole extent.
    pub restrictions: Option<Vec<Vec<ResolvedRestriction>>>,
    /// Indices of templates referenced by this one, ascending, no duplicates.
    pub depends_on: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedOutput {
    pub template: usize,
    pub order_by: Vec<(String, SortDir)>,
    pub attributes: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedQuery {
    pub ast: QueryAst,
    pub templates: Vec<ResolvedTemplate>,
    /// Template indices in evaluation order.
    pub order: Vec<usize>,
    pub outputs: Vec<ResolvedOutput>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidatedQuery {
    pub fn template_index(&self, ident: &str) -> Option<usize> {
        self.templates.iter().position(|t| t.ident == ident)
    }
}

/// Template identifiers in evaluation order.
pub fn template_order(q: &ValidatedQuery) -> Vec<&str> {
    q.order.iter().map(|&i| q.templates[i].ident.as_str()).collect()
}

struct Checker<'a> {
    schema: &'a Schema,
    ast: &'a QueryAst,
    diags: Vec<Diagnostic>,
    /// First declaration index of each template identifier.
    first_decl: Vec<Option<usize>>,
}

impl Checker<'_> {
    fn error(&mut self, code: &'static str, span: Span, template: Option<&str>, message: String) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            code,
            message,
            span,
            template: template.map(String::from),
        });
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.ast.templates.iter().position(|t| t.ident.name == name)
    }

    fn class_of(&self, idx: usize) -> Option<&str> {
        let name = self.ast.templates[idx].type_name.name.as_str();
        self.schema.has_class(name).then_some(name)
    }
}

pub fn validate_query(ast: &QueryAst, schema: &Schema) -> Result<ValidatedQuery, Vec<Diagnostic>> {
    let mut c = Checker {
        schema,
        ast,
        diags: Vec::new(),
        first_decl: Vec::new(),
    };

    if let VersionSelector::Filter { rhs, .. } = &ast.version {
        if let Err(e) = rhs.eval() {
            c.error(
                "arithmetic",
                query_start(),
                None,
                format!("version expression: {e}"),
            );
        }
    }

    for (i, t) in ast.templates.iter().enumerate() {
        let first = c.lookup(&t.ident.name).filter(|&f| f < i);
        if let Some(f) = first {
            let prev = ast.templates[f].ident.span;
            c.error(
                "duplicate-template",
                t.ident.span,
                Some(&t.ident.name),
                format!("template `{}` is already declared at {prev}", t.ident.name),
            );
        }
        c.first_decl.push(first);
        if !schema.has_class(&t.type_name.name) {
            c.error(
                "unknown-type",
                t.type_name.span,
                Some(&t.ident.name),
                format!("unknown type `{}`", t.type_name.name),
            );
        }
    }

    let mut templates = Vec::with_capacity(ast.templates.len());
    for i in 0..ast.templates.len() {
        templates.push(resolve_template(&mut c, i));
    }

    let order = match topo_order(&templates) {
        Ok(order) => order,
        Err(stuck) => {
            let names: Vec<&str> = stuck
                .iter()
                .map(|&i| ast.templates[i].ident.name.as_str())
                .collect();
            let t = &ast.templates[stuck[0]];
            c.error(
                "template-cycle",
                t.ident.span,
                Some(&t.ident.name),
                format!("templates reference each other in a cycle: {}", names.join(", ")),
            );
            Vec::new()
        }
    };

    let mut outputs = Vec::new();
    for o in &ast.outputs {
        if let Some(out) = resolve_output(&mut c, o) {
            outputs.push(out);
        }
    }

    let mut used = vec![false; ast.templates.len()];
    for t in &templates {
        for &d in &t.depends_on {
            used[d] = true;
        }
    }
    for o in &outputs {
        used[o.template] = true;
    }
    for (i, t) in ast.templates.iter().enumerate() {
        if !used[i] && c.first_decl[i].is_none() {
            c.diags.push(Diagnostic {
                severity: Severity::Warning,
                code: "unused-template",
                message: format!("template `{}` is never output or referenced", t.ident.name),
                span: t.ident.span,
                template: Some(t.ident.name.clone()),
            });
        }
    }

    if c.diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(c.diags);
    }
    Ok(ValidatedQuery {
        ast: ast.clone(),
        templates,
        order,
        outputs,
        warnings: c.diags,
    })
}

fn query_start() -> Span {
    Span {
        start: 0,
        end: 0,
        line: 1,
        column: 1,
    }
}

fn resolve_template(c: &mut Checker, idx: usize) -> ResolvedTemplate {
    let t = &c.ast.templates[idx];
    let ident = t.ident.name.clone();
    let class = t.type_name.name.clone();
    let known = c.schema.has_class(&class);
    let mut depends_on = Vec::new();
    let restrictions = t.restrictions.as_ref().map(|d| {
        let mut groups = Vec::new();
        for conj in &d.0 {
            let mut members = Vec::new();
            for r in &conj.0 {
                if !known {
                    continue;
                }
                if let Some(test) = resolve_restriction(c, &ident, &class, &r.body, r.span) {
                    if let Test::Ref { target, .. } = &test {
                        depends_on.push(*target);
                    }
                    members.push(ResolvedRestriction {
                        negated: r.negated,
                        test,
                    });
                }
            }
            groups.push(members);
        }
        groups
    });
    depends_on.sort_unstable();
    depends_on.dedup();
    ResolvedTemplate {
        ident,
        class,
        restrictions,
        depends_on,
    }
}

fn type_mismatch(attr: &str, ty: &AttrType, expr: &str) -> String {
    format!(
        "attribute `{attr}` has type {}, but the expression is {expr}",
        ty.name()
    )
}

fn resolve_restriction(
    c: &mut Checker,
    template: &str,
    class: &str,
    body: &RestrictionBody,
    span: Span,
) -> Option<Test> {
    let schema = c.schema;
    match body {
        RestrictionBody::Attr(a) => {
            let name = &a.name.name;
            let Some(def) = schema.attribute(class, name).ok().flatten() else {
                if let AttrExpr::Enum(word) = &a.expr {
                    if schema.resolve_relation(class, name).is_ok() {
                        // `Child HANDLER` names a template, not a literal.
                        let target = Ident {
                            name: word.clone(),
                            span: Span {
                                start: span.end - word.len(),
                                end: span.end,
                                ..span
                            },
                        };
                        return resolve_ref(c, template, class, &a.name, None, &target);
                    }
                }
                let msg = if schema.resolve_relation(class, name).is_ok() {
                    format!("`{name}` is a relation of {class}, not an attribute")
                } else {
                    format!("{class} has no attribute `{name}`")
                };
                c.error("unknown-attribute", a.name.span, Some(template), msg);
                return None;
            };
            let mismatch = |c: &mut Checker, expr: &str| {
                c.error(
                    "type-mismatch",
                    span,
                    Some(template),
                    type_mismatch(name, &def.ty, expr),
                );
                None
            };
            let predicate = match (&a.expr, &def.ty) {
                (AttrExpr::Bool(b), AttrType::Boolean) => Predicate::Bool(*b),
                (AttrExpr::Regex(p), AttrType::String) => Predicate::Regex {
                    pattern: p.clone(),
                    regex: compile_full_match(p).expect("parser checked the pattern"),
                },
                (AttrExpr::Int(op, e), AttrType::Int) => match e.eval() {
                    Ok(v) => Predicate::Int(*op, v),
                    Err(err) => {
                        c.error("arithmetic", span, Some(template), err.to_string());
                        return None;
                    }
                },
                (AttrExpr::Float(op, e), AttrType::Float) => match e.eval() {
                    Ok(v) => Predicate::Float(*op, v),
                    Err(err) => {
                        c.error("arithmetic", span, Some(template), err.to_string());
                        return None;
                    }
                },
                (AttrExpr::Date(op, d), AttrType::Date) => Predicate::Date(*op, *d),
                (AttrExpr::Enum(lit), AttrType::Enum(lits)) => {
                    if !lits.contains(lit) {
                        c.error(
                            "unknown-literal",
                            span,
                            Some(template),
                            format!(
                                "`{lit}` is not a literal of `{name}` (expected one of {})",
                                lits.join(", ")
                            ),
                        );
                        return None;
                    }
                    Predicate::Enum(lit.clone())
                }
                (expr, _) => return mismatch(c, expr.kind_name()),
            };
            Some(Test::Attr {
                attribute: name.clone(),
                predicate,
            })
        }
        RestrictionBody::Ref(r) => {
            if r.quantifier.is_none() {
                if let Some(def) = schema.attribute(class, &r.relation.name).ok().flatten() {
                    // `Type ^CLASS`: an escaped literal is still a literal.
                    if let AttrType::Enum(lits) = &def.ty {
                        if lits.contains(&r.target.name) {
                            return Some(Test::Attr {
                                attribute: def.name.clone(),
                                predicate: Predicate::Enum(r.target.name.clone()),
                            });
                        }
                    }
                }
            }
            resolve_ref(c, template, class, &r.relation, r.quantifier, &r.target)
        }
    }
}

fn resolve_ref(
    c: &mut Checker,
    template: &str,
    class: &str,
    relation: &Ident,
    quantifier: Option<Quantifier>,
    target: &Ident,
) -> Option<Test> {
    let schema = c.schema;
    let rel = match schema.resolve_relation(class, &relation.name) {
        Ok(rel) => rel,
        Err(_) => {
            let msg = match schema.attribute(class, &relation.name).ok().flatten() {
                Some(def) => format!(
                    "`{}` is an attribute of {class}; expected a {} value",
                    relation.name,
                    def.ty.name()
                ),
                None => format!("{class} has no relation `{}`", relation.name),
            };
            c.error("unknown-relation", relation.span, Some(template), msg);
            return None;
        }
    };
    let mut ok = true;
    match (rel.upper_bound(), quantifier) {
        (UpperBound::Many, None) => {
            c.error(
                "missing-quantifier",
                relation.span,
                Some(template),
                format!("quantifier required: {} has upper bound many", relation.name),
            );
            ok = false;
        }
        (UpperBound::One, Some(q)) => {
            c.error(
                "unexpected-quantifier",
                relation.span,
                Some(template),
                format!(
                    "quantifier {q} not allowed: {} has upper bound one",
                    relation.name
                ),
            );
            ok = false;
        }
        _ => {}
    }
    let Some(idx) = c.lookup(&target.name) else {
        c.error(
            "unresolved-template",
            target.span,
            Some(template),
            format!("no template named `{}`", target.name),
        );
        return None;
    };
    if let Some(target_class) = c.class_of(idx) {
        if !schema.is_subtype(target_class, rel.target()).unwrap_or(false) {
            let target_class = target_class.to_string();
            c.error(
                "incompatible-template",
                target.span,
                Some(template),
                format!(
                    "template `{}` lists {target_class}, but {} leads to {}",
                    target.name,
                    relation.name,
                    rel.target()
                ),
            );
            ok = false;
        }
    }
    ok.then(|| Test::Ref {
        relation: rel.into(),
        quantifier,
        target: idx,
    })
}

fn resolve_output(c: &mut Checker, o: &crate::parser::OutputAst) -> Option<ResolvedOutput> {
    let name = &o.template.name;
    let Some(idx) = c.lookup(name) else {
        c.error(
            "unknown-output",
            o.template.span,
            None,
            format!("OUTPUT names undeclared template `{name}`"),
        );
        return None;
    };
    let class = c.class_of(idx).map(String::from)?;
    let mut ok = true;
    let mut check = |c: &mut Checker, attr: &Ident, clause: &str| {
        if c.schema.attribute(&class, &attr.name).ok().flatten().is_none() {
            c.error(
                "unknown-output-attribute",
                attr.span,
                Some(name),
                format!(
                    "{clause} names `{}`, which is not an attribute of {class}",
                    attr.name
                ),
            );
            ok = false;
        }
    };
    for (key, _) in &o.order_by {
        check(c, key, "ORDER_BY");
    }
    for attr in o.attributes.iter().flatten() {
        check(c, attr, "ATTRIBUTE");
    }
    ok.then(|| ResolvedOutput {
        template: idx,
        order_by: o.order_by.iter().map(|(k, d)| (k.name.clone(), *d)).collect(),
        attributes: o
            .attributes
            .as_ref()
            .map(|a| a.iter().map(|i| i.name.clone()).collect()),
    })
}

/// Kahn's algorithm, always taking the lowest ready index. On a cycle,
/// returns the templates that could not be scheduled.
fn topo_order(templates: &[ResolvedTemplate]) -> Result<Vec<usize>, Vec<usize>> {
    let n = templates.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&i| !done[i] && templates[i].depends_on.iter().all(|&d| done[d]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => return Err((0..n).filter(|&i| !done[i]).collect()),
        }
    }
    Ok(order)
}
