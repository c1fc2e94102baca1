//! A meta-model driven query engine for versioned software architecture
//! models.
//!
//! The pipeline is:
//!
//! 1. [`metamodel::Schema::from_json`] loads the meta-model (classes,
//!    attributes, references and user-defined shortcuts).
//! 2. [`model::VersionedModel::from_json`] loads and checks a model instance
//!    against that schema.
//! 3. [`parser::parse_query`] turns query text into a [`parser::QueryAst`].
//! 4. [`validator::validate_query`] type-checks the query against the schema.
//! 5. [`eval::evaluate`] computes the template match sets per selected version.
//! 6. [`serialize::serialize`] marshals the result into JSON.
//!
//! [`ingest`] and [`bench`] build models from source trees and synthetic
//! generators, and [`complete`] drives schema-aware completion for the REPL.

pub mod bench;
pub mod complete;
pub mod eval;
pub mod expr;
pub mod ingest;
pub mod metamodel;
pub mod model;
pub mod parser;
pub mod serialize;
pub mod validator;

mod par;

pub use eval::{evaluate, oracle_evaluate, ExecMode, QueryResult};
pub use metamodel::Schema;
pub use model::VersionedModel;
pub use parser::{parse_query, QueryAst};
pub use serialize::{serialize, JsonStyle};
pub use validator::{validate_query, ValidatedQuery};

/// The shipped structural-view schema.
pub const STRUCTURAL_SCHEMA: &str = include_str!("../assets/structural.schema.json");

/// Bundled copies of the client/server running example and the seven
/// scalability queries.
pub mod corpus {
    pub const RUNNING_QUERY: &str = include_str!("../assets/running/running.aiql");
    pub const RUNNING_MODEL: &str = include_str!("../assets/running/system.model.json");
    pub const MINIMAL_QUERY: &str = include_str!("../assets/running/minimal.aiql");

    pub const SCALABILITY_QUERIES: [(&str, &str); 7] = [
        ("q1", include_str!("../assets/bench/q1.aiql")),
        ("q2", include_str!("../assets/bench/q2.aiql")),
        ("q3", include_str!("../assets/bench/q3.aiql")),
        ("q4", include_str!("../assets/bench/q4.aiql")),
        ("q5", include_str!("../assets/bench/q5.aiql")),
        ("q6", include_str!("../assets/bench/q6.aiql")),
        ("q7", include_str!("../assets/bench/q7.aiql")),
    ];
}
