//! Context-sensitive completion for partially typed queries.
//!
//! The parser reports which tokens could follow the text before the cursor;
//! identifier slots carry enough context (the template's class, the
//! relation or attribute just written) to look names up in the schema.

use std::collections::BTreeMap;

use crate::metamodel::{AttrType, Schema, UpperBound};
use crate::parser::{expected_at_end, ident_text, tokenize, Expected, IdentRole, Keyword, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completions {
    /// Byte offset where the word being completed starts.
    pub start: usize,
    /// Replacement candidates for `input[start..]`, sorted, without duplicates.
    pub items: Vec<String>,
}

fn is_word(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '^'
}

/// Completes the word at the end of `input`.
pub fn complete(input: &str, schema: &Schema) -> Completions {
    let start = input
        .char_indices()
        .rev()
        .take_while(|(_, c)| is_word(*c))
        .last()
        .map_or(input.len(), |(i, _)| i);
    let (prefix, partial) = input.split_at(start);
    let Some(expected) = expected_at_end(prefix) else {
        return Completions {
            start,
            items: Vec::new(),
        };
    };
    let templates = declared_templates(prefix);
    let expected = narrow_by_attribute(expected, schema);
    let mut items: Vec<String> = Vec::new();
    for e in expected {
        match e {
            Expected::Keyword(Keyword::Restrictions) => items.push("RESTRICTIONS:".into()),
            Expected::Keyword(k) => items.push(k.text().into()),
            Expected::Punct(p) if partial.is_empty() => items.push(p.text().into()),
            Expected::Ident(role) => items.extend(idents(&role, schema, &templates)),
            _ => {}
        }
    }
    items.retain(|i| i.starts_with(partial) && !i.is_empty());
    items.sort();
    items.dedup();
    Completions { start, items }
}

/// After `name` inside a restriction, keeps only the continuations that fit
/// what `name` is: a value of the attribute's type, or a template for a
/// relation.
fn narrow_by_attribute(expected: Vec<Expected>, schema: &Schema) -> Vec<Expected> {
    let Some((class, name)) = expected.iter().find_map(|e| match e {
        Expected::Ident(IdentRole::ValueOrTemplate { class, name }) => Some((class.clone(), name.clone())),
        _ => None,
    }) else {
        return expected;
    };
    let attr = schema.attribute(&class, &name).ok().flatten();
    if attr.is_none() && schema.resolve_relation(&class, &name).is_err() {
        return expected;
    }
    expected
        .into_iter()
        .filter(|e| match (e, attr.map(|a| &a.ty)) {
            (Expected::Ident(_), None) => true,
            (_, None) => false,
            (Expected::Ident(_), Some(AttrType::Enum(_))) => true,
            (Expected::Keyword(Keyword::True | Keyword::False), Some(AttrType::Boolean)) => true,
            (Expected::Str, Some(AttrType::String)) => true,
            (Expected::Punct(_), Some(AttrType::Int | AttrType::Float | AttrType::Date)) => true,
            _ => false,
        })
        .collect()
}

/// Template identifier -> class name, for templates declared in `text`.
fn declared_templates(text: &str) -> BTreeMap<String, String> {
    let Ok(tokens) = tokenize(text) else {
        return BTreeMap::new();
    };
    let mut out = BTreeMap::new();
    for w in tokens.windows(3) {
        if let (
            TokenKind::Keyword(Keyword::List),
            TokenKind::Ident { name: class, .. },
            TokenKind::Ident { name, .. },
        ) = (&w[0].kind, &w[1].kind, &w[2].kind)
        {
            out.entry(name.clone()).or_insert_with(|| class.clone());
        }
    }
    out
}

fn is_all_caps(name: &str) -> bool {
    name.chars().any(|c| c.is_ascii_uppercase())
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn idents(role: &IdentRole, schema: &Schema, templates: &BTreeMap<String, String>) -> Vec<String> {
    let template_names = |caps_need_escape: bool| {
        templates
            .keys()
            .map(|t| ident_text(t, caps_need_escape && is_all_caps(t)))
            .collect::<Vec<_>>()
    };
    match role {
        IdentRole::TypeName => schema.classes().iter().map(|c| c.name.clone()).collect(),
        IdentRole::NewTemplate => Vec::new(),
        IdentRole::RestrictionName { class } => {
            let mut out: Vec<String> = schema
                .all_attributes(class)
                .unwrap_or_default()
                .iter()
                .map(|a| a.name.clone())
                .collect();
            out.extend(
                schema
                    .relations(class)
                    .unwrap_or_default()
                    .iter()
                    .map(|r| r.name().to_string()),
            );
            out
        }
        IdentRole::QuantifiedRelation { class } => schema
            .relations(class)
            .unwrap_or_default()
            .iter()
            .filter(|r| r.upper_bound() == UpperBound::Many)
            .map(|r| r.name().to_string())
            .collect(),
        IdentRole::ValueOrTemplate { class, name } => match schema.attribute(class, name).ok().flatten() {
            Some(a) => match &a.ty {
                AttrType::Enum(lits) => lits.clone(),
                _ => Vec::new(),
            },
            None => template_names(true),
        },
        IdentRole::TemplateRef { .. } | IdentRole::OutputTemplate => template_names(false),
        IdentRole::OutputAttribute { template } => templates
            .get(template)
            .map(|class| {
                schema
                    .all_attributes(class)
                    .unwrap_or_default()
                    .iter()
                    .map(|a| a.name.clone())
                    .collect()
            })
            .unwrap_or_default(),
    }
}
