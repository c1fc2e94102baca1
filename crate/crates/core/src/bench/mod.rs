//! Synthetic models and a timing harness for the scalability queries.

mod synth;

use std::fmt::Write;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use synth::{generate_model, SynthParams};

use crate::eval::{evaluate_with, ExecMode};
use crate::metamodel::Schema;
use crate::model::VersionedModel;
use crate::parser::parse_query;
use crate::serialize::{serialize, JsonStyle};
use crate::validator::{validate_query, Diagnostic};

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub system: String,
    pub elements: usize,
    pub query: String,
    /// Parse, validate and evaluate, averaged over the repetitions.
    pub execution_ms: f64,
    /// Serialization only, averaged over the repetitions.
    pub marshaling_ms: f64,
    /// SHA-256 of the serialized result.
    pub digest: String,
    pub payload_bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub repetitions: usize,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("query {query} does not parse: {message}")]
    Parse { query: String, message: String },
    #[error("query {query} is invalid")]
    Invalid {
        query: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("query {query}: {message}")]
    Eval { query: String, message: String },
    #[error("repetitions must be at least 1")]
    NoRepetitions,
}

/// Times every query against every model. Each pair gets one untimed
/// warm-up run; evaluation is single-threaded. The MODEL header of the
/// queries is ignored.
pub fn run_benchmark(
    models: &[(String, VersionedModel)],
    queries: &[(String, String)],
    repetitions: usize,
    schema: &Schema,
) -> Result<BenchReport, BenchError> {
    if repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    let mut rows = Vec::new();
    for (system, model) in models {
        for (name, text) in queries {
            let once = || -> Result<(f64, f64, String), BenchError> {
                let start = Instant::now();
                let ast = parse_query(text).map_err(|e| BenchError::Parse {
                    query: name.clone(),
                    message: e.to_string(),
                })?;
                let q = validate_query(&ast, schema).map_err(|diagnostics| BenchError::Invalid {
                    query: name.clone(),
                    diagnostics,
                })?;
                let result =
                    evaluate_with(&q, model, schema, ExecMode::Sequential).map_err(|e| BenchError::Eval {
                        query: name.clone(),
                        message: e.to_string(),
                    })?;
                let mid = Instant::now();
                let payload = serialize(&result, &q, schema, JsonStyle::Pretty);
                let end = Instant::now();
                Ok((
                    (mid - start).as_secs_f64() * 1e3,
                    (end - mid).as_secs_f64() * 1e3,
                    payload,
                ))
            };
            let (_, _, payload) = once()?;
            let (mut exec, mut marshal) = (0.0, 0.0);
            for _ in 0..repetitions {
                let (e, m, again) = once()?;
                assert_eq!(again, payload, "evaluation is deterministic");
                exec += e;
                marshal += m;
            }
            rows.push(BenchRow {
                system: system.clone(),
                elements: model.element_count(),
                query: name.clone(),
                execution_ms: exec / repetitions as f64,
                marshaling_ms: marshal / repetitions as f64,
                digest: hex(&Sha256::digest(payload.as_bytes())),
                payload_bytes: payload.len(),
            });
        }
    }
    Ok(BenchReport { repetitions, rows })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18} {:>9} {:<6} {:>13} {:>13} {:>11}",
            "system", "elements", "query", "execution ms", "marshal ms", "bytes"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<18} {:>9} {:<6} {:>13.3} {:>13.3} {:>11}",
                r.system, r.elements, r.query, r.execution_ms, r.marshaling_ms, r.payload_bytes
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Mean execution time of one query across all rows for it.
    pub fn mean_execution_ms(&self, query: &str) -> Option<f64> {
        let times: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.query == query)
            .map(|r| r.execution_ms)
            .collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    }
}

/// The bundled scalability queries as owned `(name, text)` pairs.
pub fn bundled_queries() -> Vec<(String, String)> {
    crate::corpus::SCALABILITY_QUERIES
        .iter()
        .map(|(n, q)| (n.to_string(), q.to_string()))
        .collect()
}
