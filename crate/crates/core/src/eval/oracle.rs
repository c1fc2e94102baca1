//! Brute-force reference evaluator used to cross-check [`super::evaluate`].
//!
//! Nothing is indexed or memoized: every reference restriction re-derives
//! the referenced template's matches from scratch, and every id lookup is a
//! linear scan. Only suitable for small models.

use std::cmp::Ordering;

use regex::Regex;

use super::{MatchSets, QueryResult};
use crate::metamodel::Schema;
use crate::model::{AttrValue, ModelElement, VersionError, VersionSelector, VersionSnapshot, VersionedModel};
use crate::parser::Quantifier;
use crate::validator::{Predicate, Test, ValidatedQuery};

struct Oracle<'a> {
    q: &'a ValidatedQuery,
    schema: &'a Schema,
    snap: &'a VersionSnapshot,
    /// One compiled pattern per (template, group, member); `None` elsewhere.
    patterns: Vec<Vec<Vec<Option<Regex>>>>,
}

pub fn oracle_evaluate<'m>(
    q: &ValidatedQuery,
    model: &'m VersionedModel,
    schema: &Schema,
) -> Result<QueryResult<'m>, VersionError> {
    let count = model.version_count();
    let picked: Vec<u32> = match &q.ast.version {
        VersionSelector::First => vec![1],
        VersionSelector::Last => vec![count],
        VersionSelector::Filter { op, rhs } => {
            let rhs = rhs.eval()?;
            (1..=count)
                .filter(|&v| match i64::from(v).cmp(&rhs) {
                    Ordering::Less => matches!(op.symbol(), "<" | "<="),
                    Ordering::Equal => matches!(op.symbol(), "<=" | "=" | ">="),
                    Ordering::Greater => matches!(op.symbol(), ">" | ">="),
                })
                .collect()
        }
    };
    if count == 0 || picked.is_empty() {
        return Err(VersionError::EmptySelection { count });
    }
    let patterns = q
        .templates
        .iter()
        .map(|t| {
            t.restrictions
                .iter()
                .flatten()
                .map(|conj| {
                    conj.iter()
                        .map(|r| match &r.test {
                            Test::Attr {
                                predicate: Predicate::Regex { pattern, .. },
                                ..
                            } => Some(Regex::new(&format!("^({pattern})$")).expect("valid pattern")),
                            _ => None,
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Vec<_>>();

    let mut per_version = Vec::new();
    for v in picked {
        let snap = &model.versions()[(v - 1) as usize];
        let oracle = Oracle {
            q,
            schema,
            snap,
            patterns: patterns.clone(),
        };
        let sets = (0..q.templates.len())
            .map(|t| {
                (0..snap.elements().len())
                    .filter(|&i| oracle.matches(t, &snap.elements()[i]))
                    .collect()
            })
            .collect();
        per_version.push(MatchSets { snapshot: snap, sets });
    }
    Ok(QueryResult { per_version })
}

impl Oracle<'_> {
    fn find(&self, id: &str) -> Option<&ModelElement> {
        self.snap.elements().iter().find(|e| e.id == id)
    }

    fn matches(&self, t: usize, e: &ModelElement) -> bool {
        let template = &self.q.templates[t];
        let in_extent =
            self.schema.classes().iter().any(|c| {
                c.name == e.class && self.schema.is_subtype(&c.name, &template.class).unwrap_or(false)
            });
        if !in_extent {
            return false;
        }
        let Some(groups) = &template.restrictions else {
            return true;
        };
        for (g, conj) in groups.iter().enumerate() {
            let mut all = true;
            for (m, r) in conj.iter().enumerate() {
                let mut ok = match &r.test {
                    Test::Attr { attribute, predicate } => {
                        self.attr_holds(e.attributes.get(attribute), predicate, &self.patterns[t][g][m])
                    }
                    Test::Ref {
                        relation,
                        quantifier,
                        target,
                    } => {
                        let mut current: Vec<&ModelElement> = vec![e];
                        for step in &relation.path {
                            let mut next: Vec<&ModelElement> = Vec::new();
                            for x in &current {
                                for id in x.references.get(step).into_iter().flatten() {
                                    if let Some(y) = self.find(id) {
                                        if !next.iter().any(|n| n.id == y.id) {
                                            next.push(y);
                                        }
                                    }
                                }
                            }
                            current = next;
                        }
                        let total = current.len();
                        let hits = current.iter().filter(|x| self.matches(*target, x)).count();
                        match quantifier {
                            Some(Quantifier::Exists) => hits > 0,
                            Some(Quantifier::ForAll) => current.iter().all(|x| self.matches(*target, x)),
                            Some(Quantifier::Count(n)) => hits as u64 == *n,
                            Some(Quantifier::Range(a, b)) => *a <= hits as u64 && hits as u64 <= *b,
                            None => total == 1 && hits == 1,
                        }
                    }
                };
                if r.negated {
                    ok = !ok;
                }
                if !ok {
                    all = false;
                }
            }
            if all {
                return true;
            }
        }
        false
    }

    fn attr_holds(&self, value: Option<&AttrValue>, predicate: &Predicate, regex: &Option<Regex>) -> bool {
        let cmp = |ord: Option<Ordering>, op: &crate::expr::CmpOp| {
            let Some(ord) = ord else { return false };
            match op.symbol() {
                "<" => ord == Ordering::Less,
                "<=" => ord != Ordering::Greater,
                "=" => ord == Ordering::Equal,
                ">" => ord == Ordering::Greater,
                _ => ord != Ordering::Less,
            }
        };
        match (value, predicate) {
            (Some(AttrValue::Bool(v)), Predicate::Bool(b)) => v == b,
            (Some(AttrValue::String(s)), Predicate::Regex { .. }) => {
                regex.as_ref().expect("compiled").is_match(s)
            }
            (Some(AttrValue::Int(v)), Predicate::Int(op, rhs)) => cmp(Some(v.cmp(rhs)), op),
            (Some(AttrValue::Float(v)), Predicate::Float(op, rhs)) => cmp(v.partial_cmp(rhs), op),
            (Some(AttrValue::Date(v)), Predicate::Date(op, rhs)) => cmp(Some(v.cmp(rhs)), op),
            (Some(AttrValue::Enum(v)), Predicate::Enum(l)) => v == l,
            _ => false,
        }
    }
}
