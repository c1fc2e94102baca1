//! Query evaluation over versioned models.
//!
//! Each selected version is evaluated independently. Within a version,
//! templates are computed once each, in the validator's topological order,
//! so a reference restriction only ever looks at finished match sets.

mod oracle;

use regex::Regex;

use crate::metamodel::Schema;
use crate::model::{select_versions, AttrValue, ModelElement, VersionError, VersionSnapshot, VersionedModel};
use crate::par;
use crate::parser::Quantifier;
use crate::validator::{Predicate, ResolvedRelation, ResolvedTemplate, Test, ValidatedQuery};

pub use oracle::oracle_evaluate;

/// Compiles a query string literal into a regex that must match the whole
/// value.
pub fn compile_full_match(pattern: &str) -> Result<Regex, regex::Error> {
    Regex::new(&format!("^(?:{pattern})$"))
}

/// Applies an attribute test. Null values never satisfy a test.
pub fn eval_attr_expr(value: &AttrValue, predicate: &Predicate) -> bool {
    match (value, predicate) {
        (AttrValue::Bool(v), Predicate::Bool(b)) => v == b,
        (AttrValue::String(s), Predicate::Regex { regex, .. }) => regex.is_match(s),
        (AttrValue::Int(v), Predicate::Int(op, rhs)) => op.holds(v.cmp(rhs)),
        (AttrValue::Float(v), Predicate::Float(op, rhs)) => v.partial_cmp(rhs).is_some_and(|o| op.holds(o)),
        (AttrValue::Date(v), Predicate::Date(op, rhs)) => op.holds(v.cmp(rhs)),
        (AttrValue::Enum(v), Predicate::Enum(lit)) => v == lit,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    fn parallel(self) -> bool {
        self == ExecMode::Parallel && par::enabled()
    }
}

/// Match sets of every template for one version.
#[derive(Debug, Clone)]
pub struct MatchSets<'m> {
    pub snapshot: &'m VersionSnapshot,
    /// Per template (declaration order): ascending positions into
    /// `snapshot.elements()`, which is ascending id order.
    pub sets: Vec<Vec<usize>>,
}

impl<'m> MatchSets<'m> {
    pub fn version(&self) -> u32 {
        self.snapshot.index()
    }

    pub fn elements(&self, template: usize) -> Vec<&'m ModelElement> {
        let all = self.snapshot.elements();
        self.sets[template].iter().map(|&i| &all[i]).collect()
    }

    pub fn ids(&self, template: usize) -> Vec<&'m str> {
        self.elements(template)
            .into_iter()
            .map(|e| e.id.as_str())
            .collect()
    }
}

impl PartialEq for MatchSets<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.version() == other.version() && self.sets == other.sets
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult<'m> {
    /// Ascending version index.
    pub per_version: Vec<MatchSets<'m>>,
}

pub fn evaluate<'m>(
    q: &ValidatedQuery,
    model: &'m VersionedModel,
    schema: &Schema,
) -> Result<QueryResult<'m>, VersionError> {
    evaluate_with(q, model, schema, ExecMode::default())
}

pub fn evaluate_with<'m>(
    q: &ValidatedQuery,
    model: &'m VersionedModel,
    schema: &Schema,
    mode: ExecMode,
) -> Result<QueryResult<'m>, VersionError> {
    let selected = select_versions(&q.ast.version, model.version_count())?;
    let snapshots: Vec<&VersionSnapshot> = selected
        .iter()
        .map(|&v| model.version(v).expect("selected version exists"))
        .collect();
    let parallel = mode.parallel();
    let per_version = par::map(&snapshots, parallel, |snap| MatchSets {
        snapshot: snap,
        sets: evaluate_snapshot(q, snap, schema, parallel),
    });
    Ok(QueryResult { per_version })
}

/// Match sets for one snapshot, indexed by template.
pub fn evaluate_snapshot(
    q: &ValidatedQuery,
    snap: &VersionSnapshot,
    schema: &Schema,
    parallel: bool,
) -> Vec<Vec<usize>> {
    let n = q.templates.len();
    let mut sets = vec![Vec::new(); n];
    let mut members: Vec<Vec<bool>> = vec![Vec::new(); n];
    for &t in &q.order {
        let template = &q.templates[t];
        let extent = snap
            .extent_positions(&template.class, schema)
            .expect("validated class");
        let matched = match &template.restrictions {
            None => extent,
            Some(_) => par::filter(&extent, parallel, |pos| holds(template, snap, pos, &members)),
        };
        let mut bitmap = vec![false; snap.len()];
        for &p in &matched {
            bitmap[p] = true;
        }
        members[t] = bitmap;
        sets[t] = matched;
    }
    sets
}

fn holds(template: &ResolvedTemplate, snap: &VersionSnapshot, pos: usize, members: &[Vec<bool>]) -> bool {
    let Some(groups) = &template.restrictions else {
        return true;
    };
    let element = &snap.elements()[pos];
    groups.iter().any(|conj| {
        conj.iter().all(|r| {
            let ok = match &r.test {
                Test::Attr { attribute, predicate } => eval_attr_expr(element.attr(attribute), predicate),
                Test::Ref {
                    relation,
                    quantifier,
                    target,
                } => {
                    let targets = reachable(snap, pos, relation);
                    let matching = targets.iter().filter(|&&p| members[*target][p]).count();
                    quantified(*quantifier, targets.len(), matching)
                }
            };
            ok != r.negated
        })
    })
}

/// Distinct positions reachable from `pos` along the relation's path, in
/// ascending order.
fn reachable(snap: &VersionSnapshot, pos: usize, relation: &ResolvedRelation) -> Vec<usize> {
    let elements = snap.elements();
    let mut frontier = vec![pos];
    for step in &relation.path {
        let mut next: Vec<usize> = frontier
            .iter()
            .flat_map(|&p| elements[p].targets(step))
            .filter_map(|id| snap.position(id))
            .collect();
        next.sort_unstable();
        next.dedup();
        frontier = next;
    }
    frontier
}

/// Decides a reference restriction from the number of distinct targets and
/// how many of them match the referenced template.
pub(crate) fn quantified(quantifier: Option<Quantifier>, targets: usize, matching: usize) -> bool {
    match quantifier {
        Some(Quantifier::Exists) => matching >= 1,
        Some(Quantifier::ForAll) => matching == targets,
        Some(Quantifier::Count(n)) => matching as u64 == n,
        Some(Quantifier::Range(lo, hi)) => (lo..=hi).contains(&(matching as u64)),
        None => targets == 1 && matching == 1,
    }
}
