//! Builds a structural model from a directory tree.
//!
//! Every directory holding at least one included file becomes a SUBSYSTEM
//! component, every included file a CLASS component named after its stem.
//! Containment is encoded with ComponentEdge elements. Optionally, import
//! lines found by regex add edges between the files they connect.
//!
//! Ids are derived from paths relative to the root, so the result does not
//! depend on traversal order:
//!
//! | element                 | id                         |
//! |-------------------------|----------------------------|
//! | the system              | `system`                   |
//! | directory `a/b`         | `dir:a/b`                  |
//! | file `a/b/C.java`       | `file:a/b/C.java`          |
//! | containment edge        | `edge:<child path>`        |
//! | import edge             | `import:<from>-><to>`      |

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use regex::Regex;
use thiserror::Error;
use walkdir::WalkDir;

use crate::metamodel::Schema;
use crate::model::{AttrValue, ModelElement, ModelError, VersionSnapshot, VersionedModel};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMode {
    #[default]
    ContainmentOnly,
    ContainmentPlusImports,
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub root: PathBuf,
    /// Globs over `/`-separated relative paths. Empty means every file.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Defaults to the root directory's name.
    pub system_name: Option<String>,
    pub edge_mode: EdgeMode,
    /// Regexes applied per line; the first capture group that matched names
    /// the imported entity. Empty means [`DEFAULT_IMPORT_PATTERNS`].
    pub import_patterns: Vec<String>,
}

impl IngestConfig {
    pub fn new(root: impl Into<PathBuf>) -> IngestConfig {
        IngestConfig {
            root: root.into(),
            include: Vec::new(),
            exclude: Vec::new(),
            system_name: None,
            edge_mode: EdgeMode::ContainmentOnly,
            import_patterns: Vec::new(),
        }
    }
}

/// Java/Kotlin/Python imports, C includes and Rust `use` lines.
pub const DEFAULT_IMPORT_PATTERNS: [&str; 4] = [
    r"^\s*import\s+(?:static\s+)?([\w.]+)",
    r#"^\s*#\s*include\s*["<]([^">]+)[">]"#,
    r"^\s*from\s+([\w.]+)\s+import\b",
    r"^\s*(?:pub\s+)?use\s+([\w:]+)",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("`{0}` is not a directory")]
    NotADirectory(PathBuf),
    #[error("invalid glob `{glob}`: {message}")]
    Glob { glob: String, message: String },
    #[error("invalid import pattern `{pattern}`: {message}")]
    Pattern { pattern: String, message: String },
    #[error("two paths map to element id `{0}`")]
    IdCollision(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug)]
pub struct Ingested {
    pub model: VersionedModel,
    pub warnings: Vec<String>,
}

fn glob_set(globs: &[String]) -> Result<(GlobSet, Vec<globset::GlobMatcher>), IngestError> {
    let mut builder = GlobSetBuilder::new();
    let mut each = Vec::new();
    for g in globs {
        let glob = Glob::new(g).map_err(|e| IngestError::Glob {
            glob: g.clone(),
            message: e.to_string(),
        })?;
        each.push(glob.compile_matcher());
        builder.add(glob);
    }
    let set = builder.build().map_err(|e| IngestError::Glob {
        glob: globs.join(", "),
        message: e.to_string(),
    })?;
    Ok((set, each))
}

fn rel_string(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

struct Builder {
    elements: Vec<ModelElement>,
    ids: BTreeSet<String>,
    /// Outgoing edge ids per element id.
    outgoing: BTreeMap<String, Vec<String>>,
}

impl Builder {
    fn push(&mut self, e: ModelElement) -> Result<(), IngestError> {
        if !self.ids.insert(e.id.clone()) {
            return Err(IngestError::IdCollision(e.id));
        }
        self.elements.push(e);
        Ok(())
    }

    fn component(&mut self, id: String, name: &str, ty: Option<&str>) -> Result<(), IngestError> {
        let mut attributes = BTreeMap::from([("Name".to_string(), AttrValue::String(name.to_string()))]);
        let class = match ty {
            Some(ty) => {
                attributes.insert("Type".into(), AttrValue::Enum(ty.into()));
                attributes.insert("Version".into(), AttrValue::Null);
                "TechnicalComponent"
            }
            None => "SoftwareSystem",
        };
        self.push(ModelElement {
            id,
            class: class.into(),
            attributes,
            references: BTreeMap::new(),
        })
    }

    fn edge(&mut self, id: String, parent: &str, child: &str) -> Result<(), IngestError> {
        self.outgoing
            .entry(parent.to_string())
            .or_default()
            .push(id.clone());
        self.push(ModelElement {
            id,
            class: "ComponentEdge".into(),
            attributes: BTreeMap::new(),
            references: BTreeMap::from([
                ("Parent".to_string(), vec![parent.to_string()]),
                ("Child".to_string(), vec![child.to_string()]),
            ]),
        })
    }
}

/// Scans `cfg.root` and returns a single-version model plus warnings.
pub fn scan_tree(cfg: &IngestConfig, schema: &Schema) -> Result<Ingested, IngestError> {
    let root = &cfg.root;
    let meta = std::fs::metadata(root).map_err(|source| IngestError::Io {
        path: root.clone(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(IngestError::NotADirectory(root.clone()));
    }
    let (include, include_each) = glob_set(&cfg.include)?;
    let (exclude, _) = glob_set(&cfg.exclude)?;
    let patterns: Vec<Regex> = if cfg.import_patterns.is_empty() {
        DEFAULT_IMPORT_PATTERNS
            .iter()
            .map(|p| Regex::new(p).expect("valid default"))
            .collect()
    } else {
        cfg.import_patterns
            .iter()
            .map(|p| {
                Regex::new(p).map_err(|e| IngestError::Pattern {
                    pattern: p.clone(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?
    };

    let mut files: Vec<String> = Vec::new();
    let walker = WalkDir::new(root).min_depth(1).into_iter().filter_entry(|e| {
        let hidden = e.file_name().to_string_lossy().starts_with('.');
        let rel = e.path().strip_prefix(root).map(rel_string).unwrap_or_default();
        !hidden && !exclude.is_match(&rel)
    });
    for entry in walker {
        let entry = entry.map_err(|e| IngestError::Io {
            path: e.path().map_or_else(|| root.clone(), Path::to_path_buf),
            source: e
                .into_io_error()
                .unwrap_or_else(|| std::io::Error::other("walk failed")),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = rel_string(entry.path().strip_prefix(root).expect("under root"));
        if cfg.include.is_empty() || include.is_match(&rel) {
            files.push(rel);
        }
    }
    files.sort();

    let mut warnings = Vec::new();
    for (glob, matcher) in cfg.include.iter().zip(&include_each) {
        if !files.iter().any(|f| matcher.is_match(f)) {
            warnings.push(format!("include glob `{glob}` matched no files"));
        }
    }

    let mut dirs = BTreeSet::new();
    for f in &files {
        let mut parent = Path::new(f).parent();
        while let Some(p) = parent.filter(|p| !p.as_os_str().is_empty()) {
            dirs.insert(rel_string(p));
            parent = p.parent();
        }
    }
    let container = |rel: &str| -> String {
        match Path::new(rel).parent().filter(|p| !p.as_os_str().is_empty()) {
            Some(p) => format!("dir:{}", rel_string(p)),
            None => "system".to_string(),
        }
    };

    let system_name = cfg.system_name.clone().unwrap_or_else(|| {
        root.canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "system".into())
    });
    let mut b = Builder {
        elements: Vec::new(),
        ids: BTreeSet::new(),
        outgoing: BTreeMap::new(),
    };
    b.component("system".into(), &system_name, None)?;
    for d in &dirs {
        let name = d.rsplit('/').next().unwrap_or(d);
        b.component(format!("dir:{d}"), name, Some("SUBSYSTEM"))?;
        b.edge(format!("edge:{d}"), &container(d), &format!("dir:{d}"))?;
    }
    for f in &files {
        let stem = Path::new(f)
            .file_stem()
            .map_or_else(|| f.clone(), |s| s.to_string_lossy().into_owned());
        b.component(format!("file:{f}"), &stem, Some("CLASS"))?;
        b.edge(format!("edge:{f}"), &container(f), &format!("file:{f}"))?;
    }

    if cfg.edge_mode == EdgeMode::ContainmentPlusImports {
        let mut by_stem: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        for f in &files {
            if let Some(stem) = Path::new(f).file_stem() {
                by_stem
                    .entry(stem.to_string_lossy().into_owned())
                    .or_default()
                    .push(f);
            }
        }
        let contents = par::map(&files, true, |f| std::fs::read(root.join(f)));
        for (f, bytes) in files.iter().zip(contents) {
            let bytes = bytes.map_err(|source| IngestError::Io {
                path: root.join(f),
                source,
            })?;
            let text = String::from_utf8_lossy(&bytes);
            let mut targets = BTreeSet::new();
            for line in text.lines() {
                for re in &patterns {
                    let Some(caps) = re.captures(line) else { continue };
                    let Some(m) = caps.iter().skip(1).flatten().next() else {
                        continue;
                    };
                    let name = imported_stem(m.as_str());
                    for &t in by_stem.get(name).into_iter().flatten() {
                        if t != f {
                            targets.insert(t);
                        }
                    }
                }
            }
            for t in targets {
                b.edge(
                    format!("import:{f}->{t}"),
                    &format!("file:{f}"),
                    &format!("file:{t}"),
                )?;
            }
        }
    }

    let outgoing = std::mem::take(&mut b.outgoing);
    for e in &mut b.elements {
        if e.class != "ComponentEdge" {
            e.references.insert(
                "ComponentEdge".into(),
                outgoing.get(&e.id).cloned().unwrap_or_default(),
            );
        }
    }
    let model = VersionedModel::new(&system_name, vec![VersionSnapshot::new(1, b.elements)], schema)?;
    Ok(Ingested { model, warnings })
}

/// `com.acme.FooHandler` -> `FooHandler`, `net/http.h` -> `http`,
/// `crate::a::b` -> `b`.
fn imported_stem(name: &str) -> &str {
    let name = name.trim_end_matches(".h").trim_end_matches(".hpp");
    let last = name
        .rsplit(['.', '/', ':'])
        .find(|s| !s.is_empty())
        .unwrap_or(name);
    last
}
