//! JSON rendering of query results.
//!
//! A single selected version renders as an array holding one array per
//! OUTPUT directive. Several versions render as an array of
//! `{"version": n, "results": [...]}` envelopes, ascending by version.
//!
//! Each element is an object whose first key is `"type"` (the class name),
//! followed by its attributes in schema declaration order and then its
//! references as arrays of target ids. An `ATTRIBUTE` list keeps `"type"`
//! and the listed attributes only.

use std::cmp::Ordering;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::eval::{MatchSets, QueryResult};
use crate::metamodel::Schema;
use crate::model::{format_date, AttrValue, ModelElement};
use crate::parser::SortDir;
use crate::validator::{ResolvedOutput, ValidatedQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JsonStyle {
    /// Two-space indentation.
    #[default]
    Pretty,
    Compact,
}

pub fn serialize(result: &QueryResult<'_>, q: &ValidatedQuery, schema: &Schema, style: JsonStyle) -> String {
    let doc = Document { result, q, schema };
    match style {
        JsonStyle::Pretty => serde_json::to_string_pretty(&doc),
        JsonStyle::Compact => serde_json::to_string(&doc),
    }
    .expect("JSON values always serialize")
}

pub fn to_value(result: &QueryResult<'_>, q: &ValidatedQuery, schema: &Schema) -> Value {
    serde_json::to_value(Document { result, q, schema }).expect("JSON values always serialize")
}

// Streamed straight into the writer; building a `Value` tree first costs
// several times more on large results.
struct Document<'a> {
    result: &'a QueryResult<'a>,
    q: &'a ValidatedQuery,
    schema: &'a Schema,
}

impl Serialize for Document<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let version = |sets| VersionJson {
            sets,
            q: self.q,
            schema: self.schema,
        };
        if let [single] = self.result.per_version.as_slice() {
            return version(single).serialize(s);
        }
        let mut seq = s.serialize_seq(Some(self.result.per_version.len()))?;
        for sets in &self.result.per_version {
            seq.serialize_element(&Envelope {
                version: sets.version(),
                results: version(sets),
            })?;
        }
        seq.end()
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    version: u32,
    results: VersionJson<'a>,
}

struct VersionJson<'a> {
    sets: &'a MatchSets<'a>,
    q: &'a ValidatedQuery,
    schema: &'a Schema,
}

impl Serialize for VersionJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut outer = s.serialize_seq(Some(self.q.outputs.len()))?;
        for out in &self.q.outputs {
            let mut elements = self.sets.elements(out.template);
            sort_elements(&mut elements, &out.order_by);
            let objects: Vec<ElementJson> = elements
                .into_iter()
                .map(|e| ElementJson {
                    e,
                    out,
                    schema: self.schema,
                })
                .collect();
            outer.serialize_element(&objects)?;
        }
        outer.end()
    }
}

struct ElementJson<'a> {
    e: &'a ModelElement,
    out: &'a ResolvedOutput,
    schema: &'a Schema,
}

impl Serialize for ElementJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let e = self.e;
        let mut obj = s.serialize_map(None)?;
        obj.serialize_entry("type", &e.class)?;
        for a in self.schema.all_attributes(&e.class).unwrap_or_default() {
            if self
                .out
                .attributes
                .as_ref()
                .is_some_and(|keep| !keep.contains(&a.name))
            {
                continue;
            }
            obj.serialize_entry(&a.name, &AttrJson(e.attr(&a.name)))?;
        }
        if self.out.attributes.is_none() {
            for r in self.schema.all_references(&e.class).unwrap_or_default() {
                obj.serialize_entry(&r.name, e.targets(&r.name))?;
            }
        }
        obj.end()
    }
}

struct AttrJson<'a>(&'a AttrValue);

impl Serialize for AttrJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            AttrValue::Null => s.serialize_unit(),
            AttrValue::Bool(b) => s.serialize_bool(*b),
            AttrValue::String(v) | AttrValue::Enum(v) => s.serialize_str(v),
            AttrValue::Int(i) => s.serialize_i64(*i),
            AttrValue::Float(f) => s.serialize_f64(*f),
            AttrValue::Date(d) => s.serialize_str(&format_date(d)),
        }
    }
}

/// Orders elements by the given keys, then by id. Under ASC nulls come
/// first; DESC reverses the whole key order, so nulls come last.
pub fn sort_elements(elements: &mut [&ModelElement], order_by: &[(String, SortDir)]) {
    if order_by.is_empty() && elements.windows(2).all(|w| w[0].id < w[1].id) {
        return;
    }
    elements.sort_by(|a, b| {
        for (key, dir) in order_by {
            let ord = compare_values(a.attr(key), b.attr(key));
            let ord = match dir {
                SortDir::Asc => ord,
                SortDir::Desc => ord.reverse(),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        a.id.cmp(&b.id)
    });
}

fn compare_values(a: &AttrValue, b: &AttrValue) -> Ordering {
    use AttrValue::*;
    match (a, b) {
        (Null, Null) => Ordering::Equal,
        (Null, _) => Ordering::Less,
        (_, Null) => Ordering::Greater,
        (Bool(x), Bool(y)) => x.cmp(y),
        (String(x), String(y)) | (Enum(x), Enum(y)) => x.cmp(y),
        (Int(x), Int(y)) => x.cmp(y),
        (Float(x), Float(y)) => x.total_cmp(y),
        (Date(x), Date(y)) => x.cmp(y),
        // Values of one attribute share a type; fall back to a fixed rank.
        _ => rank(a).cmp(&rank(b)),
    }
}

fn rank(v: &AttrValue) -> u8 {
    match v {
        AttrValue::Null => 0,
        AttrValue::Bool(_) => 1,
        AttrValue::Int(_) => 2,
        AttrValue::Float(_) => 3,
        AttrValue::Date(_) => 4,
        AttrValue::String(_) => 5,
        AttrValue::Enum(_) => 6,
    }
}
