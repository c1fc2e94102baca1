use std::path::{Path, PathBuf};

use aiql::eval::{evaluate_with, ExecMode};
use aiql::model::VersionError;
use aiql::parser::{parse_query, ParseError};
use aiql::{serialize, JsonStyle, Schema, ValidatedQuery, VersionedModel};

#[derive(Debug)]
pub enum CliError {
    /// Already reported on stderr.
    Reported(u8),
    User(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Io(format!("cannot read `{}`: {e}", path.display()))
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Reported(code) => *code,
            CliError::User(_) => 1,
            CliError::Io(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> Option<String> {
        match self {
            CliError::Reported(_) => None,
            CliError::User(m) => Some(m.clone()),
            CliError::Io(m) => Some(m.clone()),
            CliError::Internal(m) => Some(format!("internal error: {m}")),
        }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn load_schema(path: Option<&Path>) -> Result<Schema, CliError> {
    match path {
        None => Ok(Schema::structural()),
        Some(p) => {
            let text = read(p)?;
            Schema::from_json(&text).map_err(|e| CliError::User(format!("{}: {e}", p.display())))
        }
    }
}

pub fn render_parse_error(e: &ParseError, file: &str) -> String {
    format!(
        "error {file}:{}:{} syntax {}",
        e.span.line,
        e.span.column,
        e.message()
    )
}

/// Parses and validates; diagnostics go to stderr.
pub fn check(text: &str, file: &str, schema: &Schema, json: bool) -> Result<ValidatedQuery, CliError> {
    let ast = parse_query(text).map_err(|e| {
        if json {
            let v = serde_json::json!([{
                "severity": "error",
                "code": "syntax",
                "message": e.message(),
                "line": e.span.line,
                "column": e.span.column,
                "start": e.span.start,
                "end": e.span.end,
                "template": null,
            }]);
            CliError::User(serde_json::to_string_pretty(&v).expect("plain data"))
        } else {
            CliError::User(render_parse_error(&e, file))
        }
    })?;
    let report = |diags: &[aiql::validator::Diagnostic]| {
        if json {
            let v: Vec<_> = diags.iter().map(|d| d.to_json()).collect();
            eprintln!("{}", serde_json::to_string_pretty(&v).expect("plain data"));
        } else {
            for d in diags {
                eprintln!("{}", d.render(file));
            }
        }
    };
    match aiql::validate_query(&ast, schema) {
        Ok(q) => {
            if !q.warnings.is_empty() {
                report(&q.warnings);
            }
            Ok(q)
        }
        Err(diags) => {
            report(&diags);
            Err(CliError::Reported(1))
        }
    }
}

pub fn load_model(path: &Path, schema: &Schema) -> Result<VersionedModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read model `{}`: {e}", path.display())))?;
    VersionedModel::from_json(&text, schema).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

/// The model named in a query header, relative to the query's directory.
pub fn model_path(header: &str, base: Option<&Path>) -> PathBuf {
    let p = Path::new(header);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_text(
    text: &str,
    file: &str,
    base: Option<&Path>,
    model_override: Option<&Path>,
    schema: &Schema,
    style: JsonStyle,
    sequential: bool,
    json_diags: bool,
) -> Result<String, CliError> {
    let q = check(text, file, schema, json_diags)?;
    let path = match model_override {
        Some(p) => p.to_path_buf(),
        None => model_path(&q.ast.model_path, base),
    };
    let model = load_model(&path, schema)?;
    run_validated(&q, &model, schema, style, sequential)
}

pub fn run_validated(
    q: &ValidatedQuery,
    model: &VersionedModel,
    schema: &Schema,
    style: JsonStyle,
    sequential: bool,
) -> Result<String, CliError> {
    let mode = if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let result = evaluate_with(q, model, schema, mode).map_err(|e| match e {
        VersionError::EmptySelection { .. } | VersionError::Arith(_) => CliError::User(e.to_string()),
    })?;
    Ok(serialize(&result, q, schema, style))
}
