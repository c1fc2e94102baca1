//! The architecture meta-model: query-able classes with single inheritance,
//! typed attributes, typed references and user-defined shortcut relations.
//!
//! A [`Schema`] is loaded from a JSON document and is immutable afterwards.
//! Inherited members are flattened once at load time, so the lookups used on
//! the evaluation hot path are plain slice reads.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpperBound {
    One,
    Many,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrType {
    Boolean,
    String,
    Int,
    Float,
    Date,
    Enum(Vec<String>),
}

impl AttrType {
    pub fn name(&self) -> &'static str {
        match self {
            AttrType::Boolean => "Boolean",
            AttrType::String => "String",
            AttrType::Int => "Int",
            AttrType::Float => "Float",
            AttrType::Date => "Date",
            AttrType::Enum(_) => "Enum",
        }
    }
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrType::Enum(literals) => write!(f, "Enum({})", literals.join(", ")),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrDef {
    pub name: String,
    pub ty: AttrType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefDef {
    pub name: String,
    pub target: String,
    pub upper_bound: UpperBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub supertype: Option<String>,
    pub is_abstract: bool,
    pub attributes: Vec<AttrDef>,
    pub references: Vec<RefDef>,
}

/// A named path of references, usable in queries like a reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortcutDef {
    pub name: String,
    pub source: String,
    pub path: Vec<String>,
    pub target: String,
    pub upper_bound: UpperBound,
}

/// Either a declared reference or a shortcut, as seen from a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation<'a> {
    Reference(&'a RefDef),
    Shortcut(&'a ShortcutDef),
}

impl<'a> Relation<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            Relation::Reference(r) => &r.name,
            Relation::Shortcut(s) => &s.name,
        }
    }

    pub fn target(&self) -> &'a str {
        match self {
            Relation::Reference(r) => &r.target,
            Relation::Shortcut(s) => &s.target,
        }
    }

    pub fn upper_bound(&self) -> UpperBound {
        match self {
            Relation::Reference(r) => r.upper_bound,
            Relation::Shortcut(s) => s.upper_bound,
        }
    }

    /// The reference names traversed, in order.
    pub fn path(&self) -> Vec<&'a str> {
        match self {
            Relation::Reference(r) => vec![r.name.as_str()],
            Relation::Shortcut(s) => s.path.iter().map(String::as_str).collect(),
        }
    }

    pub fn is_shortcut(&self) -> bool {
        matches!(self, Relation::Shortcut(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("schema syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("class name must not be empty")]
    EmptyClassName,
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("class `{class}` declares unknown supertype `{supertype}`")]
    UnknownSupertype { class: String, supertype: String },
    #[error("inheritance cycle through `{0}`")]
    InheritanceCycle(String),
    #[error("reference `{class}.{reference}` targets unknown class `{target}`")]
    UnknownTarget {
        class: String,
        reference: String,
        target: String,
    },
    #[error("class `{class}` declares `{member}` more than once (including inherited members)")]
    DuplicateMember { class: String, member: String },
    #[error("unknown attribute type `{ty}` for `{class}.{attribute}`")]
    UnknownAttrType {
        class: String,
        attribute: String,
        ty: String,
    },
    #[error("invalid enum `{class}.{attribute}`: {reason}")]
    InvalidEnum {
        class: String,
        attribute: String,
        reason: String,
    },
    #[error("shortcut `{shortcut}` has unknown source class `{source_class}`")]
    UnknownShortcutSource { shortcut: String, source_class: String },
    #[error("shortcut `{0}` has an empty path")]
    EmptyShortcutPath(String),
    #[error("shortcut `{shortcut}` collides with member `{member}` of class `{class}`")]
    ShortcutCollision {
        shortcut: String,
        class: String,
        member: String,
    },
    #[error("shortcut `{shortcut}` step `{step}` is not a reference of class `{class}`")]
    IllTypedShortcut {
        shortcut: String,
        step: String,
        class: String,
    },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("class `{class}` has no reference or shortcut named `{name}`")]
    UnknownRelation { class: String, name: String },
}

// Raw document shape.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    #[serde(default)]
    classes: Vec<RawClass>,
    #[serde(default)]
    shortcuts: Vec<RawShortcut>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass {
    name: String,
    #[serde(default)]
    supertype: Option<String>,
    #[serde(default, rename = "abstract")]
    is_abstract: bool,
    #[serde(default)]
    attributes: Vec<RawAttr>,
    #[serde(default)]
    references: Vec<RawRef>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttr {
    name: String,
    #[serde(rename = "type")]
    ty: String,
    #[serde(default)]
    literals: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawRef {
    name: String,
    target: String,
    upper_bound: UpperBound,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShortcut {
    name: String,
    source: String,
    path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Flat {
    /// Self first, then supertype, then its supertype, ...
    lineage: Vec<usize>,
    attributes: Vec<AttrDef>,
    references: Vec<RefDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    classes: Vec<ClassDef>,
    shortcuts: Vec<ShortcutDef>,
    by_name: HashMap<String, usize>,
    flat: Vec<Flat>,
}

fn is_enum_literal(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn parse_attr(class: &str, raw: RawAttr) -> Result<AttrDef, SchemaError> {
    let ty = match raw.ty.as_str() {
        "Boolean" => AttrType::Boolean,
        "String" => AttrType::String,
        "Int" => AttrType::Int,
        "Float" => AttrType::Float,
        "Date" => AttrType::Date,
        "Enum" => {
            let invalid = |reason: &str| SchemaError::InvalidEnum {
                class: class.to_string(),
                attribute: raw.name.clone(),
                reason: reason.to_string(),
            };
            let literals = raw.literals.clone().unwrap_or_default();
            if literals.is_empty() {
                return Err(invalid("literal set is empty"));
            }
            let mut seen = HashSet::new();
            for lit in &literals {
                if !is_enum_literal(lit) {
                    return Err(invalid(&format!("`{lit}` is not an uppercase identifier")));
                }
                if !seen.insert(lit.as_str()) {
                    return Err(invalid(&format!("duplicate literal `{lit}`")));
                }
            }
            AttrType::Enum(literals)
        }
        other => {
            return Err(SchemaError::UnknownAttrType {
                class: class.to_string(),
                attribute: raw.name,
                ty: other.to_string(),
            })
        }
    };
    if raw.literals.is_some() && !matches!(ty, AttrType::Enum(_)) {
        return Err(SchemaError::InvalidEnum {
            class: class.to_string(),
            attribute: raw.name,
            reason: "literals are only allowed on Enum attributes".into(),
        });
    }
    Ok(AttrDef { name: raw.name, ty })
}

impl Schema {
    /// Parses and checks a schema document.
    pub fn from_json(text: &str) -> Result<Schema, SchemaError> {
        let raw: RawSchema = serde_json::from_str(text).map_err(|e| SchemaError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;

        let mut classes = Vec::with_capacity(raw.classes.len());
        let mut by_name = HashMap::new();
        for rc in raw.classes {
            if rc.name.is_empty() {
                return Err(SchemaError::EmptyClassName);
            }
            if by_name.insert(rc.name.clone(), classes.len()).is_some() {
                return Err(SchemaError::DuplicateClass(rc.name));
            }
            let attributes = rc
                .attributes
                .into_iter()
                .map(|a| parse_attr(&rc.name, a))
                .collect::<Result<Vec<_>, _>>()?;
            let references = rc
                .references
                .into_iter()
                .map(|r| RefDef {
                    name: r.name,
                    target: r.target,
                    upper_bound: r.upper_bound,
                })
                .collect();
            classes.push(ClassDef {
                name: rc.name,
                supertype: rc.supertype,
                is_abstract: rc.is_abstract,
                attributes,
                references,
            });
        }

        for class in &classes {
            if let Some(sup) = &class.supertype {
                if !by_name.contains_key(sup) {
                    return Err(SchemaError::UnknownSupertype {
                        class: class.name.clone(),
                        supertype: sup.clone(),
                    });
                }
            }
            for r in &class.references {
                if !by_name.contains_key(&r.target) {
                    return Err(SchemaError::UnknownTarget {
                        class: class.name.clone(),
                        reference: r.name.clone(),
                        target: r.target.clone(),
                    });
                }
            }
        }

        let mut flat = Vec::with_capacity(classes.len());
        for (idx, class) in classes.iter().enumerate() {
            let mut lineage = vec![idx];
            let mut cursor = class.supertype.as_ref();
            while let Some(sup) = cursor {
                let sup_idx = by_name[sup];
                if lineage.contains(&sup_idx) {
                    return Err(SchemaError::InheritanceCycle(class.name.clone()));
                }
                lineage.push(sup_idx);
                cursor = classes[sup_idx].supertype.as_ref();
            }
            let mut attributes: Vec<AttrDef> = Vec::new();
            let mut references: Vec<RefDef> = Vec::new();
            let mut names = HashSet::new();
            for &ancestor in lineage.iter().rev() {
                let c = &classes[ancestor];
                for a in &c.attributes {
                    if !names.insert(a.name.clone()) {
                        return Err(SchemaError::DuplicateMember {
                            class: class.name.clone(),
                            member: a.name.clone(),
                        });
                    }
                    attributes.push(a.clone());
                }
                for r in &c.references {
                    if !names.insert(r.name.clone()) {
                        return Err(SchemaError::DuplicateMember {
                            class: class.name.clone(),
                            member: r.name.clone(),
                        });
                    }
                    references.push(r.clone());
                }
            }
            flat.push(Flat {
                lineage,
                attributes,
                references,
            });
        }

        let mut schema = Schema {
            classes,
            shortcuts: Vec::new(),
            by_name,
            flat,
        };

        let mut shortcuts = Vec::with_capacity(raw.shortcuts.len());
        for rs in raw.shortcuts {
            let source = schema
                .class_index(&rs.source)
                .map_err(|_| SchemaError::UnknownShortcutSource {
                    shortcut: rs.name.clone(),
                    source_class: rs.source.clone(),
                })?;
            if rs.path.is_empty() {
                return Err(SchemaError::EmptyShortcutPath(rs.name));
            }
            let mut current = source;
            let mut upper_bound = UpperBound::One;
            for step in &rs.path {
                let r = schema.flat[current]
                    .references
                    .iter()
                    .find(|r| &r.name == step)
                    .ok_or_else(|| SchemaError::IllTypedShortcut {
                        shortcut: rs.name.clone(),
                        step: step.clone(),
                        class: schema.classes[current].name.clone(),
                    })?;
                if r.upper_bound == UpperBound::Many {
                    upper_bound = UpperBound::Many;
                }
                current = schema.by_name[&r.target];
            }
            // Every class the shortcut applies to must keep its member names
            // disjoint from the shortcut name.
            for (idx, f) in schema.flat.iter().enumerate() {
                if !f.lineage.contains(&source) {
                    continue;
                }
                let clash = f
                    .references
                    .iter()
                    .map(|r| &r.name)
                    .chain(f.attributes.iter().map(|a| &a.name))
                    .find(|n| **n == rs.name);
                if let Some(member) = clash {
                    return Err(SchemaError::ShortcutCollision {
                        shortcut: rs.name.clone(),
                        class: schema.classes[idx].name.clone(),
                        member: member.clone(),
                    });
                }
            }
            let target = schema.classes[current].name.clone();
            shortcuts.push(ShortcutDef {
                name: rs.name,
                source: rs.source,
                path: rs.path,
                target,
                upper_bound,
            });
        }

        // Two shortcuts of the same name must not both apply to one class.
        for (i, a) in shortcuts.iter().enumerate() {
            for b in &shortcuts[i + 1..] {
                if a.name != b.name {
                    continue;
                }
                let (sa, sb) = (schema.by_name[&a.source], schema.by_name[&b.source]);
                if let Some(f) = schema
                    .flat
                    .iter()
                    .find(|f| f.lineage.contains(&sa) && f.lineage.contains(&sb))
                {
                    return Err(SchemaError::ShortcutCollision {
                        shortcut: b.name.clone(),
                        class: schema.classes[f.lineage[0]].name.clone(),
                        member: a.name.clone(),
                    });
                }
            }
        }
        schema.shortcuts = shortcuts;
        Ok(schema)
    }

    /// The shipped structural-view schema.
    pub fn structural() -> Schema {
        Schema::from_json(crate::STRUCTURAL_SCHEMA).expect("bundled schema is valid")
    }

    pub fn classes(&self) -> &[ClassDef] {
        &self.classes
    }

    pub fn shortcuts(&self) -> &[ShortcutDef] {
        &self.shortcuts
    }

    pub fn class(&self, name: &str) -> Result<&ClassDef, SchemaError> {
        self.class_index(name).map(|i| &self.classes[i])
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    fn class_index(&self, name: &str) -> Result<usize, SchemaError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| SchemaError::UnknownClass(name.to_string()))
    }

    /// Attributes declared on `class` and its ancestors, ancestor first.
    pub fn all_attributes(&self, class: &str) -> Result<&[AttrDef], SchemaError> {
        self.class_index(class)
            .map(|i| self.flat[i].attributes.as_slice())
    }

    /// References declared on `class` and its ancestors, ancestor first.
    /// Shortcuts are not included.
    pub fn all_references(&self, class: &str) -> Result<&[RefDef], SchemaError> {
        self.class_index(class)
            .map(|i| self.flat[i].references.as_slice())
    }

    pub fn attribute(&self, class: &str, name: &str) -> Result<Option<&AttrDef>, SchemaError> {
        Ok(self.all_attributes(class)?.iter().find(|a| a.name == name))
    }

    /// Reflexive, transitive subtype test.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> Result<bool, SchemaError> {
        let sub = self.class_index(sub)?;
        let sup = self.class_index(sup)?;
        Ok(self.flat[sub].lineage.contains(&sup))
    }

    /// Shortcuts whose source is `class` or one of its ancestors.
    pub fn shortcuts_for(&self, class: &str) -> Result<Vec<&ShortcutDef>, SchemaError> {
        let idx = self.class_index(class)?;
        let lineage = &self.flat[idx].lineage;
        Ok(self
            .shortcuts
            .iter()
            .filter(|s| lineage.contains(&self.by_name[&s.source]))
            .collect())
    }

    /// Looks up a relation name on a class: references first, then
    /// applicable shortcuts. Names are disjoint, so at most one can match.
    pub fn resolve_relation(&self, class: &str, name: &str) -> Result<Relation<'_>, SchemaError> {
        if let Some(r) = self.all_references(class)?.iter().find(|r| r.name == name) {
            return Ok(Relation::Reference(r));
        }
        self.shortcuts_for(class)?
            .into_iter()
            .find(|s| s.name == name)
            .map(Relation::Shortcut)
            .ok_or_else(|| SchemaError::UnknownRelation {
                class: class.to_string(),
                name: name.to_string(),
            })
    }

    /// All relation names usable on a class (references, then shortcuts).
    pub fn relations(&self, class: &str) -> Result<Vec<Relation<'_>>, SchemaError> {
        let mut out: Vec<Relation<'_>> = self
            .all_references(class)?
            .iter()
            .map(Relation::Reference)
            .collect();
        out.extend(self.shortcuts_for(class)?.into_iter().map(Relation::Shortcut));
        Ok(out)
    }

    /// Classes that are `class` or one of its subtypes, in declaration order.
    pub fn subtypes_of(&self, class: &str) -> Result<Vec<&str>, SchemaError> {
        let idx = self.class_index(class)?;
        Ok(self
            .flat
            .iter()
            .zip(&self.classes)
            .filter(|(f, _)| f.lineage.contains(&idx))
            .map(|(_, c)| c.name.as_str())
            .collect())
    }

    /// Human-readable summary, one class per block.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for class in &self.classes {
            out.push_str(&class.name);
            if class.is_abstract {
                out.push_str(" (abstract)");
            }
            if let Some(sup) = &class.supertype {
                out.push_str(&format!(" : {sup}"));
            }
            out.push('\n');
            for a in self.all_attributes(&class.name).unwrap_or_default() {
                out.push_str(&format!("    {}: {}\n", a.name, a.ty));
            }
            for r in self.all_references(&class.name).unwrap_or_default() {
                let bound = match r.upper_bound {
                    UpperBound::One => "one",
                    UpperBound::Many => "many",
                };
                out.push_str(&format!("    {} -> {} [{bound}]\n", r.name, r.target));
            }
        }
        for s in &self.shortcuts {
            out.push_str(&format!(
                "shortcut {}: {} -> {} via {}\n",
                s.name,
                s.source,
                s.target,
                s.path.join(".")
            ));
        }
        out
    }
}
