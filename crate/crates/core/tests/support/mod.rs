//! Random models and well-typed queries over a schema that exercises every
//! attribute type, inheritance, one/many references and a shortcut.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use aiql::eval::{evaluate_with, ExecMode};
use aiql::metamodel::{AttrType, UpperBound};
use aiql::model::{AttrValue, ModelElement, VersionSnapshot};
use aiql::{
    oracle_evaluate, parse_query, serialize, validate_query, JsonStyle, Schema, ValidatedQuery,
    VersionedModel,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RICH_SCHEMA: &str = r#"{
  "classes": [
    { "name": "Node", "abstract": true,
      "attributes": [ { "name": "Name", "type": "String" }, { "name": "Size", "type": "Int" } ],
      "references": [ { "name": "Out", "target": "Link", "upperBound": "many" },
                      { "name": "Owner", "target": "Node", "upperBound": "one" } ] },
    { "name": "Service", "supertype": "Node",
      "attributes": [ { "name": "Active", "type": "Boolean" }, { "name": "Load", "type": "Float" },
                      { "name": "Since", "type": "Date" },
                      { "name": "Tier", "type": "Enum", "literals": ["GOLD", "SILVER", "BRONZE"] } ],
      "references": [ { "name": "Uses", "target": "Service", "upperBound": "many" } ] },
    { "name": "Library", "supertype": "Node",
      "attributes": [ { "name": "Version", "type": "String" } ],
      "references": [] },
    { "name": "Link",
      "attributes": [ { "name": "Weight", "type": "Int" } ],
      "references": [ { "name": "To", "target": "Node", "upperBound": "one" } ] }
  ],
  "shortcuts": [ { "name": "Next", "source": "Node", "path": ["Out", "To"] } ]
}"#;

pub fn rich_schema() -> Schema {
    Schema::from_json(RICH_SCHEMA).expect("test schema is valid")
}

const STRINGS: [&str; 6] = ["alpha", "beta", "gamma", "FooHandler", "BarHandler", "x"];
const PATTERNS: [&str; 6] = [".*Handler", "alpha|beta", "g.*", "[a-z]+", "x", ".*"];
const FLOATS: [f64; 5] = [-1.0, -0.5, 0.0, 0.25, 1.5];
const OPS: [&str; 5] = ["<", "<=", "=", ">", ">="];

fn date(day: u32) -> String {
    format!("2020-01-0{day}T00:00:00")
}

fn concrete(schema: &Schema) -> Vec<String> {
    schema
        .classes()
        .iter()
        .filter(|c| !c.is_abstract)
        .map(|c| c.name.clone())
        .collect()
}

fn random_value(rng: &mut ChaCha8Rng, ty: &AttrType) -> AttrValue {
    if rng.gen_bool(0.1) {
        return AttrValue::Null;
    }
    match ty {
        AttrType::Boolean => AttrValue::Bool(rng.gen()),
        AttrType::String => AttrValue::String(STRINGS.choose(rng).unwrap().to_string()),
        AttrType::Int => AttrValue::Int(rng.gen_range(-3..=3)),
        AttrType::Float => AttrValue::Float(*FLOATS.choose(rng).unwrap()),
        AttrType::Date => AttrValue::Date(aiql::model::parse_date(&date(rng.gen_range(1..=4))).unwrap()),
        AttrType::Enum(lits) => AttrValue::Enum(lits.choose(rng).unwrap().clone()),
    }
}

pub fn random_snapshot(
    rng: &mut ChaCha8Rng,
    schema: &Schema,
    index: u32,
    max_elements: usize,
) -> VersionSnapshot {
    let classes = concrete(schema);
    let n = rng.gen_range(0..=max_elements);
    let mut elements: Vec<ModelElement> = (0..n)
        .map(|i| {
            let class = classes.choose(rng).unwrap().clone();
            let attributes = schema
                .all_attributes(&class)
                .unwrap()
                .iter()
                .map(|a| (a.name.clone(), random_value(rng, &a.ty)))
                .collect();
            ModelElement {
                id: format!("e{i:03}"),
                class,
                attributes,
                references: BTreeMap::new(),
            }
        })
        .collect();
    let kinds: Vec<String> = elements.iter().map(|e| e.class.clone()).collect();
    for e in &mut elements {
        for r in schema.all_references(&e.class).unwrap() {
            let candidates: Vec<usize> = (0..n)
                .filter(|&j| schema.is_subtype(&kinds[j], &r.target).unwrap())
                .collect();
            let count = match r.upper_bound {
                UpperBound::One => usize::from(rng.gen_bool(0.8)),
                UpperBound::Many => rng.gen_range(0..=3),
            };
            let targets = if candidates.is_empty() {
                Vec::new()
            } else {
                // Repeats are allowed on purpose.
                (0..count)
                    .map(|_| format!("e{:03}", candidates.choose(rng).unwrap()))
                    .collect()
            };
            e.references.insert(r.name.clone(), targets);
        }
    }
    VersionSnapshot::new(index, elements)
}

/// A conforming model with `versions` versions of at most `max_elements`
/// elements in total.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    schema: &Schema,
    versions: u32,
    max_elements: usize,
) -> VersionedModel {
    let per = max_elements / versions as usize;
    let snaps = (1..=versions)
        .map(|v| random_snapshot(rng, schema, v, per))
        .collect();
    VersionedModel::new("random", snaps, schema).expect("generated model conforms")
}

#[derive(Debug, Clone)]
pub struct Member {
    pub negated: bool,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct GenTemplate {
    pub ident: String,
    pub class: String,
    pub groups: Option<Vec<Vec<Member>>>,
}

#[derive(Debug, Clone)]
pub struct GenQuery {
    pub version: String,
    pub templates: Vec<GenTemplate>,
    /// Declaration order as a permutation of template indices.
    pub order: Vec<usize>,
    pub outputs: Vec<String>,
}

impl GenQuery {
    pub fn render(&self) -> String {
        let mut out = format!("MODEL 'random.json';\nVERSION {};\n", self.version);
        for &i in &self.order {
            let t = &self.templates[i];
            out.push_str(&format!("LIST {} {}", t.class, t.ident));
            if let Some(groups) = &t.groups {
                let rendered: Vec<String> = groups
                    .iter()
                    .map(|g| {
                        let members: Vec<String> = g
                            .iter()
                            .map(|m| {
                                if m.negated {
                                    format!("NOT {}", m.body)
                                } else {
                                    m.body.clone()
                                }
                            })
                            .collect();
                        format!("({})", members.join(" "))
                    })
                    .collect();
                out.push_str(" RESTRICTIONS: ");
                out.push_str(&rendered.join(" OR "));
            }
            out.push_str(";\n");
        }
        for o in &self.outputs {
            out.push_str(&format!("OUTPUT {o};\n"));
        }
        out
    }
}

fn int_expr(rng: &mut ChaCha8Rng) -> String {
    let a: i64 = rng.gen_range(-3..=3);
    match rng.gen_range(0..4) {
        0 => format!("{a} + {}", rng.gen_range(0..=2)),
        1 => format!("{a} * {}", rng.gen_range(1..=2)),
        _ => a.to_string(),
    }
}

fn float_lit(v: f64) -> String {
    format!("{v:?}")
}

pub fn attr_member(rng: &mut ChaCha8Rng, schema: &Schema, class: &str) -> Option<String> {
    let attrs = schema.all_attributes(class).unwrap();
    let a = attrs.choose(rng)?;
    let op = *OPS.choose(rng).unwrap();
    Some(match &a.ty {
        AttrType::Boolean => format!("{} {}", a.name, if rng.gen() { "true" } else { "false" }),
        AttrType::String => format!("{} '{}'", a.name, PATTERNS.choose(rng).unwrap()),
        AttrType::Int => format!("{} {op} {}", a.name, int_expr(rng)),
        AttrType::Float => {
            let v = *FLOATS.choose(rng).unwrap();
            if rng.gen_bool(0.3) {
                format!("{} {op} {} + 0.25", a.name, float_lit(v))
            } else {
                format!("{} {op} {}", a.name, float_lit(v))
            }
        }
        AttrType::Date => format!("{} {op} {}", a.name, date(rng.gen_range(1..=4))),
        AttrType::Enum(lits) => format!("{} {}", a.name, lits.choose(rng).unwrap()),
    })
}

fn quantifier(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => "EXISTS".into(),
        1 => "FOR_ALL".into(),
        2 => format!("COUNT({})", rng.gen_range(0..=3)),
        _ => {
            let a = rng.gen_range(0..=2);
            format!("RANGE({a}, {})", a + rng.gen_range(0..=2))
        }
    }
}

/// A reference restriction from a template of `class` to one of the
/// templates in `later` (index, class), if any relation fits.
pub fn ref_member(
    rng: &mut ChaCha8Rng,
    schema: &Schema,
    class: &str,
    later: &[(usize, &str)],
    quantified_only: bool,
) -> Option<String> {
    let mut options = Vec::new();
    for r in schema.relations(class).unwrap() {
        if quantified_only && r.upper_bound() != UpperBound::Many {
            continue;
        }
        for &(j, c) in later {
            if schema.is_subtype(c, r.target()).unwrap() {
                options.push((r.name().to_string(), r.upper_bound(), j));
            }
        }
    }
    let (name, bound, j) = options.choose(rng)?.clone();
    Some(match bound {
        UpperBound::Many => format!("{} {name} t{j}", quantifier(rng)),
        UpperBound::One => format!("{name} t{j}"),
    })
}

fn all_classes(schema: &Schema) -> Vec<String> {
    schema.classes().iter().map(|c| c.name.clone()).collect()
}

/// A member for template `i`; references only point at templates with a
/// higher index so the dependency graph stays acyclic.
pub fn member(rng: &mut ChaCha8Rng, schema: &Schema, templates: &[GenTemplate], i: usize) -> Option<String> {
    let later: Vec<(usize, &str)> = templates
        .iter()
        .enumerate()
        .skip(i + 1)
        .map(|(j, t)| (j, t.class.as_str()))
        .collect();
    let class = &templates[i].class;
    if rng.gen_bool(0.5) {
        if let Some(m) = ref_member(rng, schema, class, &later, false) {
            return Some(m);
        }
    }
    attr_member(rng, schema, class).or_else(|| ref_member(rng, schema, class, &later, false))
}

pub fn version_selector(rng: &mut ChaCha8Rng, versions: u32) -> String {
    let mut options = vec!["FIRST".to_string(), "LAST".to_string(), ">= 1".to_string()];
    if versions >= 2 {
        options.push("= 2".into());
        options.push("> 1 * 1".into());
        options.push("<= 2".into());
    }
    options.choose(rng).unwrap().clone()
}

pub fn random_query(rng: &mut ChaCha8Rng, schema: &Schema, versions: u32) -> GenQuery {
    let classes = all_classes(schema);
    let k = rng.gen_range(1..=4);
    let mut templates: Vec<GenTemplate> = (0..k)
        .map(|i| GenTemplate {
            ident: format!("t{i}"),
            class: classes.choose(rng).unwrap().clone(),
            groups: None,
        })
        .collect();
    for i in 0..k {
        if !rng.gen_bool(0.75) {
            continue;
        }
        let groups: Vec<Vec<Member>> = (0..rng.gen_range(1..=2))
            .map(|_| {
                (0..rng.gen_range(1..=3))
                    .filter_map(|_| {
                        member(rng, schema, &templates, i).map(|body| Member {
                            negated: rng.gen_bool(0.2),
                            body,
                        })
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|g: &Vec<Member>| !g.is_empty())
            .collect();
        if !groups.is_empty() {
            templates[i].groups = Some(groups);
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let mut outputs = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let t = rng.gen_range(0..k);
        outputs.push(output_directive(rng, schema, &templates[t]));
    }
    GenQuery {
        version: version_selector(rng, versions),
        templates,
        order,
        outputs,
    }
}

fn output_directive(rng: &mut ChaCha8Rng, schema: &Schema, t: &GenTemplate) -> String {
    let attrs: Vec<&str> = schema
        .all_attributes(&t.class)
        .unwrap()
        .iter()
        .map(|a| a.name.as_str())
        .collect();
    let mut out = t.ident.clone();
    if !attrs.is_empty() && rng.gen_bool(0.3) {
        let n = rng.gen_range(1..=attrs.len().min(2));
        let keys: Vec<String> = attrs
            .choose_multiple(rng, n)
            .map(|a| format!("{a} {}", if rng.gen() { "ASC" } else { "DESC" }))
            .collect();
        out.push_str(&format!(" ORDER_BY {}", keys.join(", ")));
    }
    if !attrs.is_empty() && rng.gen_bool(0.3) {
        let n = rng.gen_range(1..=attrs.len());
        let picked: Vec<&str> = attrs.choose_multiple(rng, n).copied().collect();
        out.push_str(&format!(" ATTRIBUTE {}", picked.join(", ")));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn validated(text: &str, schema: &Schema) -> Result<ValidatedQuery, String> {
    let ast = parse_query(text).map_err(|e| format!("parse error {e} in\n{text}"))?;
    validate_query(&ast, schema).map_err(|d| format!("diagnostics {d:?} in\n{text}"))
}

/// Matched ids per version and template, from the indexed evaluator.
pub type Sets = Vec<(u32, Vec<Vec<String>>)>;

pub fn sets(q: &ValidatedQuery, model: &VersionedModel, schema: &Schema, mode: ExecMode) -> Sets {
    evaluate_with(q, model, schema, mode)
        .expect("selection is non-empty")
        .per_version
        .iter()
        .map(|m| {
            let ids = (0..q.templates.len())
                .map(|t| m.ids(t).into_iter().map(str::to_string).collect())
                .collect();
            (m.version(), ids)
        })
        .collect()
}

/// Like [`sets`], but indexed by generator identifier (`t0`, `t1`, ...)
/// rather than declaration order.
pub fn run_sets(text: &str, model: &VersionedModel, schema: &Schema) -> Result<Sets, String> {
    let q = validated(text, schema)?;
    let by_ident: Vec<usize> = (0..q.templates.len())
        .map(|i| q.template_index(&format!("t{i}")).expect("generator identifiers"))
        .collect();
    Ok(sets(&q, model, schema, ExecMode::Sequential)
        .into_iter()
        .map(|(v, per)| (v, by_ident.iter().map(|&d| per[d].clone()).collect()))
        .collect())
}

/// One random differential case: both evaluation modes against the oracle,
/// plus byte-equal serialization.
pub fn oracle_case(seed: u64) -> Result<(), String> {
    let schema = rich_schema();
    let mut rng = rng(seed);
    let versions = rng.gen_range(1..=3);
    let model = random_model(&mut rng, &schema, versions, 200);
    let text = random_query(&mut rng, &schema, versions).render();
    let q = validated(&text, &schema)?;
    let seq = evaluate_with(&q, &model, &schema, ExecMode::Sequential).map_err(|e| e.to_string())?;
    let par = evaluate_with(&q, &model, &schema, ExecMode::Parallel).map_err(|e| e.to_string())?;
    let oracle = oracle_evaluate(&q, &model, &schema).map_err(|e| e.to_string())?;
    if seq != oracle {
        return Err(format!("seed {seed}: sequential differs from oracle for\n{text}"));
    }
    if par != oracle {
        return Err(format!("seed {seed}: parallel differs from oracle for\n{text}"));
    }
    if serialize(&seq, &q, &schema, JsonStyle::Pretty) != serialize(&oracle, &q, &schema, JsonStyle::Pretty) {
        return Err(format!("seed {seed}: serialized output differs for\n{text}"));
    }
    Ok(())
}

fn extent(snap: &VersionSnapshot, schema: &Schema, class: &str) -> BTreeSet<String> {
    snap.elements()
        .iter()
        .filter(|e| schema.is_subtype(&e.class, class).unwrap())
        .map(|e| e.id.clone())
        .collect()
}

/// Endpoints reachable from `e` along `path`, without duplicates.
fn reachable(snap: &VersionSnapshot, e: &ModelElement, path: &[&str]) -> BTreeSet<String> {
    let mut frontier: BTreeSet<String> = BTreeSet::from([e.id.clone()]);
    for step in path {
        frontier = frontier
            .iter()
            .filter_map(|id| snap.get(id))
            .flat_map(|x| x.targets(step).iter().cloned())
            .collect();
    }
    frontier
}

fn single_version_model(rng: &mut ChaCha8Rng, schema: &Schema) -> VersionedModel {
    random_model(rng, schema, 1, 120)
}

/// A random template 0 of some class plus helper templates it may point at.
fn base_query(rng: &mut ChaCha8Rng, schema: &Schema) -> GenQuery {
    let mut q = random_query(rng, schema, 1);
    q.version = "LAST".into();
    q.outputs = vec!["t0".into()];
    q
}

/// M(t) stays inside the subtype-inclusive extent of t's class, in id order
/// and without duplicates.
pub fn extent_containment(seed: u64) -> Result<(), String> {
    let schema = rich_schema();
    let mut rng = rng(seed);
    let model = random_model(&mut rng, &schema, 2, 200);
    let gq = random_query(&mut rng, &schema, 2);
    let text = gq.render();
    let q = validated(&text, &schema)?;
    for (v, per) in sets(&q, &model, &schema, ExecMode::Parallel) {
        let snap = model.version(v).unwrap();
        for (t, ids) in per.iter().enumerate() {
            let ext = extent(snap, &schema, &q.templates[t].class);
            if !ids.windows(2).all(|w| w[0] < w[1]) {
                return Err(format!("seed {seed}: set not strictly ascending for\n{text}"));
            }
            if let Some(stray) = ids.iter().find(|id| !ext.contains(*id)) {
                return Err(format!(
                    "seed {seed}: {stray} outside extent of {}",
                    q.templates[t].class
                ));
            }
        }
    }
    Ok(())
}

/// r and NOT r split the extent into two disjoint halves.
pub fn negation_partition(seed: u64) -> Result<(), String> {
    let schema = rich_schema();
    let mut rng = rng(seed);
    let model = single_version_model(&mut rng, &schema);
    let mut gq = base_query(&mut rng, &schema);
    let Some(body) = member(&mut rng, &schema, &gq.templates, 0) else {
        return Ok(());
    };
    let with = |negated: bool| {
        let mut g = gq.clone();
        g.templates[0].groups = Some(vec![vec![Member {
            negated,
            body: body.clone(),
        }]]);
        g.render()
    };
    let (plain, negated) = (with(false), with(true));
    let pos: BTreeSet<String> = run_sets(&plain, &model, &schema)?[0].1[0]
        .iter()
        .cloned()
        .collect();
    let neg: BTreeSet<String> = run_sets(&negated, &model, &schema)?[0].1[0]
        .iter()
        .cloned()
        .collect();
    gq.templates[0].groups = None;
    let ext = extent(&model.versions()[0], &schema, &gq.templates[0].class);
    if !pos.is_disjoint(&neg) {
        return Err(format!("seed {seed}: r and NOT r overlap for\n{plain}"));
    }
    let union: BTreeSet<String> = pos.union(&neg).cloned().collect();
    if union != ext {
        return Err(format!(
            "seed {seed}: r and NOT r do not cover the extent for\n{plain}"
        ));
    }
    Ok(())
}

/// Dropping a member of a single positive conjunction never shrinks M.
pub fn conjunction_monotonicity(seed: u64) -> Result<(), String> {
    let schema = rich_schema();
    let mut rng = rng(seed);
    let model = single_version_model(&mut rng, &schema);
    let mut gq = base_query(&mut rng, &schema);
    let members: Vec<Member> = (0..rng.gen_range(1..=3))
        .filter_map(|_| member(&mut rng, &schema, &gq.templates, 0))
        .map(|body| Member { negated: false, body })
        .collect();
    if members.is_empty() {
        return Ok(());
    }
    gq.templates[0].groups = Some(vec![members.clone()]);
    let full = gq.render();
    let m: BTreeSet<String> = run_sets(&full, &model, &schema)?[0].1[0]
        .iter()
        .cloned()
        .collect();
    for drop in 0..members.len() {
        let mut g = gq.clone();
        let mut rest = members.clone();
        rest.remove(drop);
        g.templates[0].groups = (!rest.is_empty()).then(|| vec![rest]);
        let text = g.render();
        let wider: BTreeSet<String> = run_sets(&text, &model, &schema)?[0].1[0]
            .iter()
            .cloned()
            .collect();
        if !wider.is_superset(&m) {
            return Err(format!(
                "seed {seed}: dropping a member shrank the set\n{full}\nvs\n{text}"
            ));
        }
    }
    Ok(())
}

/// FOR_ALL holds and EXISTS fails for every element with no targets.
pub fn empty_target_quantifiers(seed: u64) -> Result<(), String> {
    let schema = rich_schema();
    let mut rng = rng(seed);
    let model = single_version_model(&mut rng, &schema);
    let mut gq = base_query(&mut rng, &schema);
    if gq.templates.len() < 2 {
        gq.templates.push(GenTemplate {
            ident: "t1".into(),
            class: "Node".into(),
            groups: None,
        });
        gq.order.push(1);
    }
    // Pick a class for t0 with a many relation whose target fits t1.
    let later: Vec<(usize, &str)> = gq
        .templates
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, t)| (j, t.class.as_str()))
        .collect();
    let mut candidates = Vec::new();
    for class in all_classes(&schema) {
        for r in schema.relations(&class).unwrap() {
            if r.upper_bound() != UpperBound::Many {
                continue;
            }
            for &(j, c) in &later {
                if schema.is_subtype(c, r.target()).unwrap() {
                    candidates.push((
                        class.clone(),
                        r.name().to_string(),
                        r.path().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                        j,
                    ));
                }
            }
        }
    }
    let Some((class, rel, path, j)) = candidates.choose(&mut rng).cloned() else {
        return Ok(());
    };
    gq.templates[0].class = class.clone();
    let snap = &model.versions()[0];
    let path: Vec<&str> = path.iter().map(String::as_str).collect();
    let empty: BTreeSet<String> = snap
        .elements()
        .iter()
        .filter(|e| schema.is_subtype(&e.class, &class).unwrap())
        .filter(|e| reachable(snap, e, &path).is_empty())
        .map(|e| e.id.clone())
        .collect();
    for (quant, expect_in) in [("FOR_ALL", true), ("EXISTS", false)] {
        let mut g = gq.clone();
        g.templates[0].groups = Some(vec![vec![Member {
            negated: false,
            body: format!("{quant} {rel} t{j}"),
        }]]);
        let text = g.render();
        let m: BTreeSet<String> = run_sets(&text, &model, &schema)?[0].1[0]
            .iter()
            .cloned()
            .collect();
        for id in &empty {
            if m.contains(id) != expect_in {
                return Err(format!(
                    "seed {seed}: {quant} wrong for {id} with no targets in\n{text}"
                ));
            }
        }
    }
    Ok(())
}

/// Rewriting every other version leaves the sets of version 1 untouched.
pub fn version_isolation(seed: u64) -> Result<(), String> {
    let schema = rich_schema();
    let mut rng = rng(seed);
    let versions = rng.gen_range(2..=3);
    let model = random_model(&mut rng, &schema, versions, 150);
    let mut gq = random_query(&mut rng, &schema, versions);
    gq.version = ">= 1".into();
    let text = gq.render();
    let before = run_sets(&text, &model, &schema)?;
    let mut snaps = vec![model.versions()[0].clone()];
    for v in 2..=versions {
        snaps.push(random_snapshot(&mut rng, &schema, v, 75));
    }
    let edited = VersionedModel::new("edited", snaps, &schema).map_err(|e| e.to_string())?;
    let after = run_sets(&text, &edited, &schema)?;
    if before[0] != after[0] {
        return Err(format!(
            "seed {seed}: version 1 changed after editing later versions\n{text}"
        ));
    }
    gq.version = "FIRST".into();
    let alone = run_sets(&gq.render(), &model, &schema)?;
    if alone[0] != before[0] {
        return Err(format!(
            "seed {seed}: version 1 differs when selected alone\n{text}"
        ));
    }
    Ok(())
}
