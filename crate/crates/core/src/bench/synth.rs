use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metamodel::Schema;
use crate::model::{AttrValue, ModelElement, VersionSnapshot, VersionedModel};

/// Shape of a generated model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// SUBSYSTEM components.
    pub components: usize,
    /// CLASS components.
    pub classes: usize,
    /// Total ComponentEdge elements.
    pub edges: usize,
    /// Share of classes whose name ends in `Handler`.
    pub handler_fraction: f64,
    pub seed: u64,
}

impl SynthParams {
    /// Parameters for a model of about `elements` elements in total: one
    /// subsystem per 50 elements, 45% classes, the rest edges.
    pub fn for_size(elements: usize, seed: u64) -> SynthParams {
        let components = (elements / 50).max(1);
        let classes = elements * 45 / 100;
        let edges = elements.saturating_sub(1 + components + classes);
        SynthParams {
            components,
            classes,
            edges,
            handler_fraction: 0.1,
            seed,
        }
    }

    pub fn element_count(&self) -> usize {
        1 + self.components + self.classes + self.edges
    }
}

const WORDS: [&str; 16] = [
    "Request", "Session", "Cache", "Order", "User", "Payment", "Config", "Event", "Token", "Query", "Stream",
    "Report", "Index", "Route", "Account", "Message",
];
const SUFFIXES: [&str; 6] = ["Service", "Manager", "Factory", "Util", "Store", "Client"];

fn component(id: String, name: String, ty: &str, version: String) -> ModelElement {
    ModelElement {
        id,
        class: "TechnicalComponent".into(),
        attributes: BTreeMap::from([
            ("Name".to_string(), AttrValue::String(name)),
            ("Type".to_string(), AttrValue::Enum(ty.into())),
            ("Version".to_string(), AttrValue::String(version)),
        ]),
        references: BTreeMap::new(),
    }
}

/// Generates a single-version model conforming to the structural schema.
///
/// Subsystems form a containment tree under the system; classes hang off
/// random subsystems. Containment edges are created first, then random
/// class-to-class edges until `edges` is reached. If `edges` is smaller than
/// the number of containment links, the later links are dropped.
pub fn generate_model(p: &SynthParams, schema: &Schema) -> VersionedModel {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut elements = Vec::with_capacity(p.element_count());
    elements.push(ModelElement {
        id: "system".into(),
        class: "SoftwareSystem".into(),
        attributes: BTreeMap::from([("Name".to_string(), AttrValue::String("synthetic".into()))]),
        references: BTreeMap::new(),
    });

    let mut links: Vec<(usize, usize)> = Vec::new();
    for i in 0..p.components {
        let parent = if i == 0 || rng.gen_bool(0.2) {
            0
        } else {
            rng.gen_range(1..=i)
        };
        elements.push(component(
            format!("sub-{i:06}"),
            format!("subsystem{i}"),
            "SUBSYSTEM",
            "1.0".into(),
        ));
        links.push((parent, elements.len() - 1));
    }

    let handlers = (p.handler_fraction.clamp(0.0, 1.0) * p.classes as f64).round() as usize;
    let mut is_handler: Vec<bool> = (0..p.classes).map(|i| i < handlers).collect();
    is_handler.shuffle(&mut rng);
    let first_class = elements.len();
    for (i, handler) in is_handler.into_iter().enumerate() {
        let w = WORDS[rng.gen_range(0..WORDS.len())];
        let suffix = if handler {
            "Handler"
        } else {
            SUFFIXES[rng.gen_range(0..SUFFIXES.len())]
        };
        let version = format!("1.{}", rng.gen_range(0..10));
        elements.push(component(
            format!("cls-{i:07}"),
            format!("{w}{suffix}{i}"),
            "CLASS",
            version,
        ));
        let parent = if p.components == 0 {
            0
        } else {
            rng.gen_range(1..=p.components)
        };
        links.push((parent, elements.len() - 1));
    }
    links.truncate(p.edges);
    let candidates: Vec<usize> = if p.classes >= 2 {
        (first_class..elements.len()).collect()
    } else {
        (0..elements.len()).collect()
    };
    while links.len() < p.edges {
        let a = *candidates.choose(&mut rng).expect("at least the system");
        let b = *candidates.choose(&mut rng).expect("at least the system");
        links.push((a, b));
    }

    let mut outgoing: Vec<Vec<String>> = vec![Vec::new(); elements.len()];
    let mut edges = Vec::with_capacity(links.len());
    for (i, (parent, child)) in links.into_iter().enumerate() {
        let id = format!("edge-{i:07}");
        outgoing[parent].push(id.clone());
        edges.push(ModelElement {
            id,
            class: "ComponentEdge".into(),
            attributes: BTreeMap::new(),
            references: BTreeMap::from([
                ("Parent".to_string(), vec![elements[parent].id.clone()]),
                ("Child".to_string(), vec![elements[child].id.clone()]),
            ]),
        });
    }
    for (e, out) in elements.iter_mut().zip(outgoing) {
        e.references.insert("ComponentEdge".into(), out);
    }
    elements.extend(edges);
    VersionedModel::new(
        format!("synthetic-{}", p.element_count()),
        vec![VersionSnapshot::new(1, elements)],
        schema,
    )
    .expect("generated models conform")
}
