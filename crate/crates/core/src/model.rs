//! Versioned architecture models: loading, conformance checking against a
//! [`Schema`], version selection and type extents.
//!
//! Each [`VersionSnapshot`] is a self-contained graph. References never cross
//! versions and elements are kept sorted by id, so every extent and every
//! result derived from a snapshot has a deterministic order regardless of the
//! order used in the model file.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use chrono::NaiveDateTime;
use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::expr::{ArithError, CmpOp, IntExpr};
use crate::metamodel::{AttrType, Schema, SchemaError, UpperBound};

pub const DATE_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn parse_date(text: &str) -> Option<NaiveDateTime> {
    // chrono accepts single-digit fields; insist on the fixed-width layout.
    let bytes = text.as_bytes();
    let shape_ok = bytes.len() == 19
        && bytes.iter().enumerate().all(|(i, b)| match i {
            4 | 7 => *b == b'-',
            10 => *b == b'T',
            13 | 16 => *b == b':',
            _ => b.is_ascii_digit(),
        });
    if !shape_ok {
        return None;
    }
    NaiveDateTime::parse_from_str(text, DATE_FORMAT).ok()
}

pub fn format_date(d: &NaiveDateTime) -> String {
    d.format(DATE_FORMAT).to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Null,
    Bool(bool),
    String(String),
    Int(i64),
    Float(f64),
    Date(NaiveDateTime),
    Enum(String),
}

impl AttrValue {
    pub fn is_null(&self) -> bool {
        matches!(self, AttrValue::Null)
    }

    pub fn to_json(&self) -> Value {
        match self {
            AttrValue::Null => Value::Null,
            AttrValue::Bool(b) => Value::Bool(*b),
            AttrValue::String(s) | AttrValue::Enum(s) => Value::String(s.clone()),
            AttrValue::Int(i) => Value::from(*i),
            AttrValue::Float(f) => Value::from(*f),
            AttrValue::Date(d) => Value::String(format_date(d)),
        }
    }

    fn from_json(value: &Value, ty: &AttrType) -> Option<AttrValue> {
        Some(match (ty, value) {
            (_, Value::Null) => AttrValue::Null,
            (AttrType::Boolean, Value::Bool(b)) => AttrValue::Bool(*b),
            (AttrType::String, Value::String(s)) => AttrValue::String(s.clone()),
            (AttrType::Int, Value::Number(n)) => AttrValue::Int(n.as_i64()?),
            (AttrType::Float, Value::Number(n)) => AttrValue::Float(n.as_f64()?),
            (AttrType::Date, Value::String(s)) => AttrValue::Date(parse_date(s)?),
            (AttrType::Enum(literals), Value::String(s)) if literals.contains(s) => {
                AttrValue::Enum(s.clone())
            }
            _ => return None,
        })
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Null => f.write_str("null"),
            AttrValue::Bool(b) => write!(f, "{b}"),
            AttrValue::String(s) | AttrValue::Enum(s) => f.write_str(s),
            AttrValue::Int(i) => write!(f, "{i}"),
            AttrValue::Float(v) => write!(f, "{v}"),
            AttrValue::Date(d) => f.write_str(&format_date(d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelElement {
    pub id: String,
    pub class: String,
    /// Every attribute of the class (inherited included) is present; unset
    /// values are [`AttrValue::Null`].
    pub attributes: BTreeMap<String, AttrValue>,
    /// Every reference of the class is present, possibly with no targets.
    /// Target ids are kept in file order.
    pub references: BTreeMap<String, Vec<String>>,
}

impl ModelElement {
    pub fn attr(&self, name: &str) -> &AttrValue {
        self.attributes.get(name).unwrap_or(&AttrValue::Null)
    }

    pub fn targets(&self, reference: &str) -> &[String] {
        self.references
            .get(reference)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct VersionSnapshot {
    index: u32,
    elements: Vec<ModelElement>,
    positions: HashMap<String, usize>,
}

impl PartialEq for VersionSnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.elements == other.elements
    }
}

impl VersionSnapshot {
    /// Builds a snapshot without conformance checks; elements are sorted by id.
    /// Use [`VersionedModel::new`] to check the result against a schema.
    pub fn new(index: u32, mut elements: Vec<ModelElement>) -> VersionSnapshot {
        elements.sort_by(|a, b| a.id.cmp(&b.id));
        let positions = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        VersionSnapshot {
            index,
            elements,
            positions,
        }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// All elements, ordered by id.
    pub fn elements(&self) -> &[ModelElement] {
        &self.elements
    }

    pub fn get(&self, id: &str) -> Option<&ModelElement> {
        self.positions.get(id).map(|&i| &self.elements[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements whose class is `class` or a subtype, ordered by id.
    pub fn elements_of_type(&self, class: &str, schema: &Schema) -> Result<Vec<&ModelElement>, SchemaError> {
        Ok(self
            .extent_positions(class, schema)?
            .into_iter()
            .map(|i| &self.elements[i])
            .collect())
    }

    /// Positions (into [`Self::elements`]) of the type extent of `class`.
    pub fn extent_positions(&self, class: &str, schema: &Schema) -> Result<Vec<usize>, SchemaError> {
        let members: HashSet<&str> = schema.subtypes_of(class)?.into_iter().collect();
        Ok(self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| members.contains(e.class.as_str()))
            .map(|(i, _)| i)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VersionedModel {
    pub name: String,
    versions: Vec<VersionSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueKind {
    UnknownClass(String),
    AbstractClass(String),
    DuplicateId,
    UnknownAttribute(String),
    MissingAttribute(String),
    TypeMismatch {
        attribute: String,
        expected: String,
    },
    UnknownReference(String),
    DanglingReference {
        reference: String,
        target: String,
    },
    Cardinality {
        reference: String,
        count: usize,
    },
    WrongTargetClass {
        reference: String,
        target: String,
        class: String,
        expected: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConformanceIssue {
    pub version: u32,
    pub element: String,
    pub kind: IssueKind,
}

impl fmt::Display for ConformanceIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "version {}, element `{}`: ", self.version, self.element)?;
        match &self.kind {
            IssueKind::UnknownClass(c) => write!(f, "unknown class `{c}`"),
            IssueKind::AbstractClass(c) => write!(f, "abstract class `{c}` cannot be instantiated"),
            IssueKind::DuplicateId => f.write_str("duplicate element id"),
            IssueKind::UnknownAttribute(a) => write!(f, "unknown attribute `{a}`"),
            IssueKind::MissingAttribute(a) => {
                write!(f, "missing attribute `{a}` (use null for unset values)")
            }
            IssueKind::TypeMismatch { attribute, expected } => {
                write!(f, "attribute `{attribute}` expects a {expected} value")
            }
            IssueKind::UnknownReference(r) => write!(f, "unknown reference `{r}`"),
            IssueKind::DanglingReference { reference, target } => {
                write!(f, "dangling reference `{reference}` to missing id `{target}`")
            }
            IssueKind::Cardinality { reference, count } => write!(
                f,
                "reference `{reference}` has upper bound one but {count} targets"
            ),
            IssueKind::WrongTargetClass {
                reference,
                target,
                class,
                expected,
            } => write!(
                f,
                "reference `{reference}` targets `{target}` of class `{class}`, expected `{expected}`"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("model must contain at least one version")]
    NoVersions,
    #[error("version indices must be contiguous from 1: expected {expected}, found {found}")]
    NonContiguousVersions { expected: u32, found: u32 },
    #[error("model does not conform to the schema:\n{}", render_issues(.0))]
    Conformance(Vec<ConformanceIssue>),
}

fn render_issues(issues: &[ConformanceIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VersionError {
    #[error("version selector matches none of the {count} versions")]
    EmptySelection { count: u32 },
    #[error("version expression: {0}")]
    Arith(#[from] ArithError),
}

/// The VERSION clause of a query header.
#[derive(Debug, Clone, PartialEq)]
pub enum VersionSelector {
    First,
    Last,
    Filter { op: CmpOp, rhs: IntExpr },
}

impl VersionSelector {
    /// Version indices in `1..=count` picked by the selector, ascending.
    pub fn select(&self, count: u32) -> Result<Vec<u32>, VersionError> {
        select_versions(self, count)
    }
}

pub fn select_versions(selector: &VersionSelector, count: u32) -> Result<Vec<u32>, VersionError> {
    let picked: Vec<u32> = match selector {
        VersionSelector::First => (1..=count).take(1).collect(),
        VersionSelector::Last => (1..=count).last().into_iter().collect(),
        VersionSelector::Filter { op, rhs } => {
            let rhs = rhs.eval()?;
            (1..=count)
                .filter(|&i| op.holds(i64::from(i).cmp(&rhs)))
                .collect()
        }
    };
    if picked.is_empty() {
        return Err(VersionError::EmptySelection { count });
    }
    Ok(picked)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    versions: Vec<RawVersion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVersion {
    index: u32,
    #[serde(default)]
    elements: Vec<RawElement>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    id: String,
    class: String,
    #[serde(default)]
    attributes: Map<String, Value>,
    #[serde(default)]
    references: Map<String, Value>,
}

impl VersionedModel {
    /// Parses a model document and checks it against `schema`. All
    /// conformance problems are collected before failing.
    pub fn from_json(text: &str, schema: &Schema) -> Result<VersionedModel, ModelError> {
        let raw: RawModel = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.versions.is_empty() {
            return Err(ModelError::NoVersions);
        }
        let mut issues = Vec::new();
        let mut versions = Vec::with_capacity(raw.versions.len());
        for (pos, rv) in raw.versions.into_iter().enumerate() {
            let expected = pos as u32 + 1;
            if rv.index != expected {
                return Err(ModelError::NonContiguousVersions {
                    expected,
                    found: rv.index,
                });
            }
            let elements = rv
                .elements
                .into_iter()
                .map(|re| convert_element(rv.index, re, schema, &mut issues))
                .collect();
            versions.push((rv.index, elements));
        }
        let model = VersionedModel {
            name: raw.name,
            versions: versions
                .into_iter()
                .map(|(index, elements)| VersionSnapshot::new(index, elements))
                .collect(),
        };
        issues.extend(model.conformance_issues(schema));
        if issues.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Conformance(issues))
        }
    }

    /// Assembles a model from in-memory snapshots and checks it.
    pub fn new(
        name: impl Into<String>,
        versions: Vec<VersionSnapshot>,
        schema: &Schema,
    ) -> Result<VersionedModel, ModelError> {
        if versions.is_empty() {
            return Err(ModelError::NoVersions);
        }
        for (pos, v) in versions.iter().enumerate() {
            let expected = pos as u32 + 1;
            if v.index != expected {
                return Err(ModelError::NonContiguousVersions {
                    expected,
                    found: v.index,
                });
            }
        }
        let mut versions = versions;
        for v in &mut versions {
            for e in &mut v.elements {
                for r in schema.all_references(&e.class).unwrap_or_default() {
                    e.references.entry(r.name.clone()).or_default();
                }
            }
        }
        let model = VersionedModel {
            name: name.into(),
            versions,
        };
        let issues = model.conformance_issues(schema);
        if issues.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Conformance(issues))
        }
    }

    pub fn versions(&self) -> &[VersionSnapshot] {
        &self.versions
    }

    pub fn version_count(&self) -> u32 {
        self.versions.len() as u32
    }

    /// Snapshot by 1-based index.
    pub fn version(&self, index: u32) -> Option<&VersionSnapshot> {
        index.checked_sub(1).and_then(|i| self.versions.get(i as usize))
    }

    pub fn element_count(&self) -> usize {
        self.versions.iter().map(VersionSnapshot::len).sum()
    }

    fn conformance_issues(&self, schema: &Schema) -> Vec<ConformanceIssue> {
        let mut issues = Vec::new();
        for v in &self.versions {
            let mut issue = |element: &str, kind| {
                issues.push(ConformanceIssue {
                    version: v.index,
                    element: element.to_string(),
                    kind,
                })
            };
            for pair in v.elements.windows(2) {
                if pair[0].id == pair[1].id {
                    issue(&pair[1].id, IssueKind::DuplicateId);
                }
            }
            for e in &v.elements {
                let Ok(class) = schema.class(&e.class) else {
                    issue(&e.id, IssueKind::UnknownClass(e.class.clone()));
                    continue;
                };
                if class.is_abstract {
                    issue(&e.id, IssueKind::AbstractClass(e.class.clone()));
                }
                let attrs = schema.all_attributes(&e.class).unwrap_or_default();
                for a in attrs {
                    match e.attributes.get(&a.name) {
                        None => issue(&e.id, IssueKind::MissingAttribute(a.name.clone())),
                        Some(value) if !value_conforms(value, &a.ty) => issue(
                            &e.id,
                            IssueKind::TypeMismatch {
                                attribute: a.name.clone(),
                                expected: a.ty.to_string(),
                            },
                        ),
                        Some(_) => {}
                    }
                }
                for name in e.attributes.keys() {
                    if !attrs.iter().any(|a| &a.name == name) {
                        issue(&e.id, IssueKind::UnknownAttribute(name.clone()));
                    }
                }
                let refs = schema.all_references(&e.class).unwrap_or_default();
                for (name, targets) in &e.references {
                    let Some(def) = refs.iter().find(|r| &r.name == name) else {
                        issue(&e.id, IssueKind::UnknownReference(name.clone()));
                        continue;
                    };
                    if def.upper_bound == UpperBound::One && targets.len() > 1 {
                        issue(
                            &e.id,
                            IssueKind::Cardinality {
                                reference: name.clone(),
                                count: targets.len(),
                            },
                        );
                    }
                    for t in targets {
                        match v.get(t) {
                            None => issue(
                                &e.id,
                                IssueKind::DanglingReference {
                                    reference: name.clone(),
                                    target: t.clone(),
                                },
                            ),
                            Some(target) => {
                                if !schema.is_subtype(&target.class, &def.target).unwrap_or(false) {
                                    issue(
                                        &e.id,
                                        IssueKind::WrongTargetClass {
                                            reference: name.clone(),
                                            target: t.clone(),
                                            class: target.class.clone(),
                                            expected: def.target.clone(),
                                        },
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        issues
    }

    /// Writes the model back in the file format: versions ascending,
    /// elements by id, attributes and references in schema order.
    pub fn to_json_value(&self, schema: &Schema) -> Value {
        let versions: Vec<Value> = self
            .versions
            .iter()
            .map(|v| {
                let elements: Vec<Value> = v.elements.iter().map(|e| element_json(e, schema)).collect();
                let mut obj = Map::new();
                obj.insert("index".into(), Value::from(v.index));
                obj.insert("elements".into(), Value::Array(elements));
                Value::Object(obj)
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("name".into(), Value::String(self.name.clone()));
        obj.insert("versions".into(), Value::Array(versions));
        Value::Object(obj)
    }

    pub fn to_json_string(&self, schema: &Schema) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value(schema))
            .expect("model values are always serializable");
        s.push('\n');
        s
    }
}

fn element_json(e: &ModelElement, schema: &Schema) -> Value {
    let mut attributes = Map::new();
    let mut references = Map::new();
    for a in schema.all_attributes(&e.class).unwrap_or_default() {
        attributes.insert(a.name.clone(), e.attr(&a.name).to_json());
    }
    for r in schema.all_references(&e.class).unwrap_or_default() {
        let ids = e.targets(&r.name).iter().cloned().map(Value::String).collect();
        references.insert(r.name.clone(), Value::Array(ids));
    }
    let mut obj = Map::new();
    obj.insert("id".into(), Value::String(e.id.clone()));
    obj.insert("class".into(), Value::String(e.class.clone()));
    obj.insert("attributes".into(), Value::Object(attributes));
    obj.insert("references".into(), Value::Object(references));
    Value::Object(obj)
}

fn value_conforms(value: &AttrValue, ty: &AttrType) -> bool {
    match (value, ty) {
        (AttrValue::Null, _) => true,
        (AttrValue::Bool(_), AttrType::Boolean)
        | (AttrValue::String(_), AttrType::String)
        | (AttrValue::Int(_), AttrType::Int)
        | (AttrValue::Date(_), AttrType::Date) => true,
        (AttrValue::Float(f), AttrType::Float) => f.is_finite(),
        (AttrValue::Enum(v), AttrType::Enum(literals)) => literals.contains(v),
        _ => false,
    }
}

fn convert_element(
    version: u32,
    raw: RawElement,
    schema: &Schema,
    issues: &mut Vec<ConformanceIssue>,
) -> ModelElement {
    let mut issue = |kind| {
        issues.push(ConformanceIssue {
            version,
            element: raw.id.clone(),
            kind,
        })
    };
    let mut attributes = BTreeMap::new();
    let attr_defs = schema.all_attributes(&raw.class).unwrap_or_default();
    for (name, value) in &raw.attributes {
        match attr_defs.iter().find(|a| &a.name == name) {
            // Unknown names are reported by the conformance pass.
            None => {
                attributes.insert(name.clone(), AttrValue::Null);
            }
            Some(def) => match AttrValue::from_json(value, &def.ty) {
                Some(v) => {
                    attributes.insert(name.clone(), v);
                }
                None => {
                    issue(IssueKind::TypeMismatch {
                        attribute: name.clone(),
                        expected: def.ty.to_string(),
                    });
                    attributes.insert(name.clone(), AttrValue::Null);
                }
            },
        }
    }
    let mut references = BTreeMap::new();
    for (name, value) in &raw.references {
        let ids = match value {
            Value::Array(items) => items
                .iter()
                .filter_map(|v| match v {
                    Value::String(s) => Some(s.clone()),
                    _ => None,
                })
                .collect::<Vec<_>>(),
            _ => Vec::new(),
        };
        let well_formed = matches!(value, Value::Array(items) if items.len() == ids.len());
        if !well_formed {
            issue(IssueKind::TypeMismatch {
                attribute: name.clone(),
                expected: "array of element ids".into(),
            });
        }
        references.insert(name.clone(), ids);
    }
    for r in schema.all_references(&raw.class).unwrap_or_default() {
        references.entry(r.name.clone()).or_default();
    }
    ModelElement {
        id: raw.id,
        class: raw.class,
        attributes,
        references,
    }
}
