use std::fmt::Write;

use super::ast::*;
use super::lexer::{ident_text, quote_string};
use crate::model::{format_date, VersionSelector};

/// Canonical layout: header lines, one LIST per block with its restriction
/// groups indented by four spaces, then one OUTPUT per line.
pub fn format_query(ast: &QueryAst) -> String {
    let mut out = String::new();
    writeln!(out, "MODEL {};", quote_string(&ast.model_path)).unwrap();
    let version = match &ast.version {
        VersionSelector::First => "FIRST".to_string(),
        VersionSelector::Last => "LAST".to_string(),
        VersionSelector::Filter { op, rhs } => format!("{op} {rhs}"),
    };
    writeln!(out, "VERSION {version};").unwrap();
    for t in &ast.templates {
        out.push('\n');
        write!(
            out,
            "LIST {} {}",
            ident_text(&t.type_name.name, false),
            ident_text(&t.ident.name, t.escaped)
        )
        .unwrap();
        match &t.restrictions {
            None => out.push_str(";\n"),
            Some(d) => {
                let groups: Vec<String> = d.0.iter().map(conjunction).collect();
                writeln!(out, " RESTRICTIONS:\n    {};", groups.join(" OR ")).unwrap();
            }
        }
    }
    out.push('\n');
    for o in &ast.outputs {
        write!(out, "OUTPUT {}", ident_text(&o.template.name, false)).unwrap();
        if !o.order_by.is_empty() {
            let keys: Vec<String> = o
                .order_by
                .iter()
                .map(|(name, dir)| {
                    let dir = match dir {
                        SortDir::Asc => "ASC",
                        SortDir::Desc => "DESC",
                    };
                    format!("{} {dir}", ident_text(&name.name, false))
                })
                .collect();
            write!(out, " ORDER_BY {}", keys.join(", ")).unwrap();
        }
        if let Some(attrs) = &o.attributes {
            let names: Vec<String> = attrs.iter().map(|a| ident_text(&a.name, false)).collect();
            write!(out, " ATTRIBUTE {}", names.join(", ")).unwrap();
        }
        out.push_str(";\n");
    }
    out
}

fn conjunction(c: &Conjunction) -> String {
    let members: Vec<String> = c.0.iter().map(restriction).collect();
    format!("({})", members.join(" "))
}

fn restriction(r: &Restriction) -> String {
    let mut s = String::new();
    if r.negated {
        s.push_str("NOT ");
    }
    match &r.body {
        RestrictionBody::Attr(a) => {
            s.push_str(&ident_text(&a.name.name, false));
            s.push(' ');
            match &a.expr {
                AttrExpr::Bool(b) => s.push_str(if *b { "true" } else { "false" }),
                AttrExpr::Regex(p) => s.push_str(&quote_string(p)),
                AttrExpr::Int(op, e) => write!(s, "{op} {e}").unwrap(),
                AttrExpr::Float(op, e) => write!(s, "{op} {e}").unwrap(),
                AttrExpr::Date(op, d) => write!(s, "{op} {}", format_date(d)).unwrap(),
                AttrExpr::Enum(lit) => s.push_str(lit),
            }
        }
        RestrictionBody::Ref(r) => {
            if let Some(q) = &r.quantifier {
                write!(s, "{q} ").unwrap();
            }
            write!(
                s,
                "{} {}",
                ident_text(&r.relation.name, false),
                // An unescaped all-caps target would read back as an enum
                // literal, so escape it.
                escaped_target(&r.target.name)
            )
            .unwrap();
        }
    }
    s
}

fn escaped_target(name: &str) -> String {
    let caps = name.chars().any(|c| c.is_ascii_uppercase())
        && name
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
    ident_text(name, caps)
}
