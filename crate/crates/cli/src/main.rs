//! `aiql` command-line front end.
//!
//! Exit codes: 0 success, 1 user error (bad query, invalid model, empty
//! version selection, bad flags), 2 I/O error, 3 internal error.

mod pipeline;
mod repl;

use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aiql::bench::{bundled_queries, generate_model, run_benchmark, BenchError, SynthParams};
use aiql::ingest::{scan_tree, EdgeMode, IngestConfig, IngestError};
use aiql::parser::query_metrics;
use aiql::JsonStyle;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pipeline::{load_schema, render_parse_error, CliError};

#[derive(Parser)]
#[command(name = "aiql", version, about = "Query versioned architecture models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SchemaArg {
    /// Meta-model JSON. Defaults to the built-in structural schema.
    #[arg(long, env = "AIQL_SCHEMA")]
    schema: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum DiagFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a query and print the JSON result.
    Run {
        query: PathBuf,
        #[command(flatten)]
        schema: SchemaArg,
        /// Use this model instead of the one named in the MODEL header.
        #[arg(long)]
        model_override: Option<PathBuf>,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Single-line JSON.
        #[arg(long)]
        compact: bool,
        /// Evaluate on the calling thread only.
        #[arg(long)]
        sequential: bool,
        #[arg(long, value_enum, default_value = "text")]
        diagnostics: DiagFormat,
    },
    /// Parse and type-check a query without running it.
    Validate {
        query: PathBuf,
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long, value_enum, default_value = "text")]
        diagnostics: DiagFormat,
    },
    /// Print size measurements of query files.
    Metrics {
        #[arg(required = true)]
        queries: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Build a model from a source tree.
    Ingest {
        root: PathBuf,
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only files matching one of these globs (relative paths).
        #[arg(long)]
        include: Vec<String>,
        #[arg(long)]
        exclude: Vec<String>,
        /// Name of the SoftwareSystem element.
        #[arg(long)]
        name: Option<String>,
        /// Also add edges for import/include lines.
        #[arg(long)]
        imports: bool,
        /// Import regex; the first matching capture group names the import.
        #[arg(long = "import-pattern")]
        import_patterns: Vec<String>,
    },
    /// Time the scalability queries on synthetic models.
    Bench {
        /// Model sizes in elements, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10000,25000,50000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Directory of `*.aiql` files to use instead of the bundled queries.
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Interactive session. End a query with a line holding only `;;`.
    Repl {
        #[command(flatten)]
        schema: SchemaArg,
        /// Model to query; defaults to the path in each query's header.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(msg) = e.message() {
                eprintln!("{msg}");
            }
            ExitCode::from(e.code())
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            let newline = if std::io::stdout().is_terminal() { "\n" } else { "" };
            write!(stdout, "{text}{newline}")
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            query,
            schema,
            model_override,
            out,
            compact,
            sequential,
            diagnostics,
        } => {
            let schema = load_schema(schema.schema.as_deref())?;
            let style = if compact {
                JsonStyle::Compact
            } else {
                JsonStyle::Pretty
            };
            let text = pipeline::read(&query)?;
            let json = pipeline::run_text(
                &text,
                &query.display().to_string(),
                query.parent(),
                model_override.as_deref(),
                &schema,
                style,
                sequential,
                diagnostics == DiagFormat::Json,
            )?;
            write_output(out.as_deref(), &json)
        }
        Command::Validate {
            query,
            schema,
            diagnostics,
        } => {
            let schema = load_schema(schema.schema.as_deref())?;
            let text = pipeline::read(&query)?;
            let q = pipeline::check(
                &text,
                &query.display().to_string(),
                &schema,
                diagnostics == DiagFormat::Json,
            )?;
            println!(
                "ok: {} template(s), {} output(s)",
                q.templates.len(),
                q.outputs.len()
            );
            Ok(())
        }
        Command::Metrics { queries, json } => metrics(&queries, json),
        Command::Ingest {
            root,
            schema,
            out,
            include,
            exclude,
            name,
            imports,
            import_patterns,
        } => {
            let schema = load_schema(schema.schema.as_deref())?;
            let cfg = IngestConfig {
                root,
                include,
                exclude,
                system_name: name,
                edge_mode: if imports {
                    EdgeMode::ContainmentPlusImports
                } else {
                    EdgeMode::ContainmentOnly
                },
                import_patterns,
            };
            let ingested = scan_tree(&cfg, &schema).map_err(|e| match e {
                IngestError::Io { .. } => CliError::Io(e.to_string()),
                IngestError::Model(_) | IngestError::IdCollision(_) => CliError::Internal(e.to_string()),
                _ => CliError::User(e.to_string()),
            })?;
            for w in &ingested.warnings {
                eprintln!("warning: {w}");
            }
            write_output(out.as_deref(), &ingested.model.to_json_string(&schema))
        }
        Command::Bench {
            sizes,
            seed,
            reps,
            queries,
            json,
        } => {
            let schema = aiql::Schema::structural();
            let queries = match queries {
                Some(dir) => read_query_dir(&dir)?,
                None => bundled_queries(),
            };
            let models: Vec<_> = sizes
                .iter()
                .map(|&n| {
                    let p = SynthParams::for_size(n, seed);
                    (format!("synthetic-{n}"), generate_model(&p, &schema))
                })
                .collect();
            let report = run_benchmark(&models, &queries, reps, &schema).map_err(|e| match e {
                BenchError::Invalid { query, diagnostics } => {
                    let lines: Vec<String> = diagnostics.iter().map(|d| d.render(&query)).collect();
                    CliError::User(lines.join("\n"))
                }
                other => CliError::User(other.to_string()),
            })?;
            print!("{}", report.to_table());
            if let Some(path) = json {
                std::fs::write(&path, report.to_json()).map_err(|e| CliError::io(&path, e))?;
            }
            Ok(())
        }
        Command::Repl { schema, model } => {
            let schema = load_schema(schema.schema.as_deref())?;
            repl::run(schema, model)
        }
    }
}

fn metrics(files: &[PathBuf], json: bool) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for f in files {
        let text = pipeline::read(f)?;
        let m = query_metrics(&text)
            .map_err(|e| CliError::User(render_parse_error(&e, &f.display().to_string())))?;
        rows.push((f.display().to_string(), m));
    }
    if json {
        let value: Vec<serde_json::Value> = rows
            .iter()
            .map(|(file, m)| {
                serde_json::json!({
                    "file": file,
                    "queryCount": m.query_count,
                    "outputCount": m.output_count,
                    "charCount": m.char_count,
                    "keywordTotal": m.keyword_total,
                    "keywordUnique": m.keyword_unique,
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&value).expect("plain data"));
        return Ok(());
    }
    let width = rows.iter().map(|(f, _)| f.len()).max().unwrap_or(4).max(4);
    println!(
        "{:<width$}  {:>7}  {:>7}  {:>5}  {:>8}  {:>6}",
        "file", "queries", "outputs", "chars", "keywords", "unique"
    );
    for (file, m) in rows {
        println!(
            "{:<width$}  {:>7}  {:>7}  {:>5}  {:>8}  {:>6}",
            file, m.query_count, m.output_count, m.char_count, m.keyword_total, m.keyword_unique
        );
    }
    Ok(())
}

fn read_query_dir(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "aiql"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::User(format!("no .aiql files in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            pipeline::read(&p).map(|text| (name, text))
        })
        .collect()
}
