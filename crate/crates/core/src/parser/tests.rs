use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus::{MINIMAL_QUERY, RUNNING_QUERY, SCALABILITY_QUERIES};

fn conj(t: &TemplateAst) -> &[Restriction] {
    &t.restrictions.as_ref().expect("restrictions").0[0].0
}

#[test]
fn running_example_structure() {
    let q = parse_query(RUNNING_QUERY).unwrap();
    assert_eq!(q.model_path, "system.model.json");
    assert_eq!(q.version, VersionSelector::Last);
    assert_eq!(q.templates.len(), 2);
    assert_eq!(q.outputs.len(), 2);

    let server = &q.templates[0];
    assert_eq!(server.type_name.name, "TechnicalComponent");
    assert_eq!(server.ident.name, "serverComponent");
    assert_eq!(
        conj(server)[0].body,
        RestrictionBody::Attr(AttrRestriction {
            name: Ident::new("Name"),
            expr: AttrExpr::Regex("server".into()),
        })
    );

    let system = &q.templates[1];
    assert_eq!(
        conj(system)[0].body,
        RestrictionBody::Ref(RefRestriction {
            quantifier: Some(Quantifier::Exists),
            relation: Ident::new("Children"),
            target: Ident::new("serverComponent"),
        })
    );
    let outs: Vec<_> = q.outputs.iter().map(|o| o.template.name.as_str()).collect();
    assert_eq!(outs, ["serverComponent", "system"]);
}

#[test]
fn enum_and_regex_conjunction() {
    let q = parse_query(SCALABILITY_QUERIES[2].1).unwrap();
    assert_eq!(q.templates.len(), 1);
    let members = conj(&q.templates[0]);
    assert_eq!(members.len(), 2);
    assert!(matches!(&members[0].body,
        RestrictionBody::Attr(a) if a.name.name == "Type" && a.expr == AttrExpr::Enum("CLASS".into())));
    assert!(matches!(&members[1].body,
        RestrictionBody::Attr(a) if a.name.name == "Name" && a.expr == AttrExpr::Regex(".*Handler".into())));
}

#[test]
fn unquantified_reference() {
    let q = parse_query(SCALABILITY_QUERIES[3].1).unwrap();
    assert!(matches!(&conj(&q.templates[0])[0].body,
        RestrictionBody::Ref(r) if r.quantifier.is_none() && r.relation.name == "Child" && r.target.name == "handler"));
}

#[test]
fn whole_corpus_parses() {
    parse_query(RUNNING_QUERY).unwrap();
    parse_query(MINIMAL_QUERY).unwrap();
    for (name, text) in SCALABILITY_QUERIES {
        parse_query(text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn output_is_required() {
    let err = parse_query("MODEL 'm'; VERSION LAST; LIST T t;").unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::MissingOutput);
    assert!(err.expected.contains(&Expected::Keyword(Keyword::Output)));
}

#[test]
fn header_is_required() {
    let err = parse_query("LIST T t; OUTPUT t;").unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::MissingHeader);
    assert_eq!(err.span.start, 0);
    let err = parse_query("").unwrap_err();
    assert!(err.at_eof);
    assert_eq!(err.expected, [Expected::Keyword(Keyword::Model)]);
}

#[test]
fn error_reports_expected_set() {
    let text = "MODEL 'm'; VERSION LAST; LIST T t RESTRICTIONS: (Name 'x' ; OUTPUT t;";
    let err = parse_query(text).unwrap_err();
    assert_eq!(&text[err.span.start..err.span.end], ";");
    assert!(err.expected.contains(&Expected::Punct(Punct::RParen)));
    assert!(err.expected.contains(&Expected::Keyword(Keyword::Not)));
    assert!(err.expected.contains(&Expected::Keyword(Keyword::Exists)));
    assert!(err.message().contains("expected"));
}

#[test]
fn version_selectors() {
    let q = parse_query("MODEL 'm'; VERSION FIRST; LIST T t; OUTPUT t;").unwrap();
    assert_eq!(q.version, VersionSelector::First);
    let q = parse_query("MODEL 'm'; VERSION <= 1 + 1; LIST T t; OUTPUT t;").unwrap();
    let VersionSelector::Filter { op, rhs } = q.version else {
        panic!()
    };
    assert_eq!(op, CmpOp::Le);
    assert_eq!(rhs.eval(), Ok(2));
    let q = parse_query("MODEL 'm'; VERSION > (2 - 3) * -1; LIST T t; OUTPUT t;").unwrap();
    let VersionSelector::Filter { rhs, .. } = q.version else {
        panic!()
    };
    assert_eq!(rhs.eval(), Ok(1));
    let err = parse_query("MODEL 'm'; VERSION = 1.5; LIST T t; OUTPUT t;").unwrap_err();
    assert!(err.message().contains("integers"));
}

fn first_expr(text: &str) -> AttrExpr {
    let q = parse_query(&format!(
        "MODEL 'm'; VERSION LAST; LIST T t RESTRICTIONS: ({text}); OUTPUT t;"
    ))
    .unwrap();
    match &conj(&q.templates[0])[0].body {
        RestrictionBody::Attr(a) => a.expr.clone(),
        other => panic!("{other:?}"),
    }
}

#[test]
fn attribute_expressions() {
    assert_eq!(first_expr("Flag true"), AttrExpr::Bool(true));
    assert_eq!(first_expr("Flag false"), AttrExpr::Bool(false));
    match first_expr("Size >= 2 + 3 * 4") {
        AttrExpr::Int(CmpOp::Ge, e) => assert_eq!(e.eval(), Ok(14)),
        other => panic!("{other:?}"),
    }
    match first_expr("Weight < 1.5 / 2.0") {
        AttrExpr::Float(CmpOp::Lt, e) => assert_eq!(e.eval(), Ok(0.75)),
        other => panic!("{other:?}"),
    }
    match first_expr("Created = 2023-04-05T06:07:08") {
        AttrExpr::Date(CmpOp::Eq, d) => assert_eq!(crate::model::format_date(&d), "2023-04-05T06:07:08"),
        other => panic!("{other:?}"),
    }
    assert_eq!(
        first_expr("Kind SUB_SYSTEM2"),
        AttrExpr::Enum("SUB_SYSTEM2".into())
    );
}

#[test]
fn mixed_arithmetic_rejected() {
    let err =
        parse_query("MODEL 'm'; VERSION LAST; LIST T t RESTRICTIONS: (S > 1 + 2.0); OUTPUT t;").unwrap_err();
    assert!(err.message().contains("mix"));
}

#[test]
fn invalid_regex_rejected_at_literal() {
    let text = "MODEL 'm'; VERSION LAST; LIST T t RESTRICTIONS: (Name '(unclosed'); OUTPUT t;";
    let err = parse_query(text).unwrap_err();
    assert!(err.span.contains(text.find("'(").unwrap()));
}

#[test]
fn quantifiers_and_negation() {
    let q = parse_query(
        "MODEL 'm'; VERSION LAST;
         LIST A a RESTRICTIONS: (NOT EXISTS r b FOR_ALL r b COUNT(2) r b RANGE(1, 3) r b) OR (NOT x 'y');
         LIST B b;
         OUTPUT a;",
    )
    .unwrap();
    let d = q.templates[0].restrictions.as_ref().unwrap();
    assert_eq!(d.0.len(), 2);
    let quants: Vec<_> = d.0[0]
        .0
        .iter()
        .map(|r| match &r.body {
            RestrictionBody::Ref(rr) => rr.quantifier.unwrap(),
            _ => panic!(),
        })
        .collect();
    assert_eq!(
        quants,
        [
            Quantifier::Exists,
            Quantifier::ForAll,
            Quantifier::Count(2),
            Quantifier::Range(1, 3)
        ]
    );
    assert!(d.0[0].0[0].negated);
    assert!(!d.0[0].0[1].negated);
    assert!(d.0[1].0[0].negated);
}

#[test]
fn bad_quantifier_bounds() {
    for q in ["RANGE(3, 1) r b", "COUNT(-1) r b", "RANGE(-1, 2) r b"] {
        let text = format!("MODEL 'm'; VERSION LAST; LIST A a RESTRICTIONS: ({q}); OUTPUT a;");
        assert!(matches!(
            parse_query(&text).unwrap_err().kind,
            ParseErrorKind::Invalid(_)
        ));
    }
}

#[test]
fn empty_group_rejected() {
    let err = parse_query("MODEL 'm'; VERSION LAST; LIST A a RESTRICTIONS: (); OUTPUT a;").unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::Unexpected(_)));
}

#[test]
fn keyword_escape() {
    let q = parse_query("MODEL 'm'; VERSION LAST; LIST T ^LIST; OUTPUT ^LIST;").unwrap();
    assert_eq!(q.templates[0].ident.name, "LIST");
    assert!(q.templates[0].escaped);
    assert!(parse_query("MODEL 'm'; VERSION LAST; LIST T LIST; OUTPUT t;").is_err());
}

#[test]
fn output_directives() {
    let q = parse_query(
        "MODEL 'm'; VERSION LAST; LIST T t; OUTPUT t ORDER_BY Name ASC, Version DESC ATTRIBUTE Name, Type;",
    )
    .unwrap();
    let o = &q.outputs[0];
    assert_eq!(o.order_by.len(), 2);
    assert_eq!(o.order_by[1].1, SortDir::Desc);
    assert_eq!(o.attributes.as_ref().unwrap().len(), 2);
    for dup in [
        "OUTPUT t ORDER_BY Name ASC, Name DESC;",
        "OUTPUT t ATTRIBUTE Name, Name;",
    ] {
        let text = format!("MODEL 'm'; VERSION LAST; LIST T t; {dup}");
        let err = parse_query(&text).unwrap_err();
        assert_eq!(&text[err.span.start..err.span.end], "Name");
    }
}

#[test]
fn comments_are_ignored() {
    let commented =
        "// header\nMODEL 'm'; // the model\nVERSION LAST;\nLIST T t; // body\nOUTPUT t;\n// done";
    assert_eq!(
        parse_query(commented).unwrap(),
        parse_query("MODEL 'm'; VERSION LAST; LIST T t; OUTPUT t;").unwrap()
    );
}

#[test]
fn format_round_trips_corpus() {
    let mut corpus = vec![RUNNING_QUERY, MINIMAL_QUERY];
    corpus.extend(SCALABILITY_QUERIES.iter().map(|(_, q)| *q));
    for text in corpus {
        let ast = parse_query(text).unwrap();
        let formatted = format_query(&ast);
        assert_eq!(parse_query(&formatted).unwrap(), ast, "{formatted}");
        // Canonical output is a fixed point.
        assert_eq!(format_query(&parse_query(&formatted).unwrap()), formatted);
    }
}

#[test]
fn format_layout() {
    let ast = parse_query(RUNNING_QUERY).unwrap();
    assert_eq!(
        format_query(&ast),
        "MODEL 'system.model.json';\nVERSION LAST;\n\n\
         LIST TechnicalComponent serverComponent RESTRICTIONS:\n    (Name 'server');\n\n\
         LIST SoftwareSystem system RESTRICTIONS:\n    (EXISTS Children serverComponent);\n\n\
         OUTPUT serverComponent;\nOUTPUT system;\n"
    );
    let plain = format_query(&parse_query(MINIMAL_QUERY).unwrap());
    assert!(!plain.contains("RESTRICTIONS"));
    let ored = parse_query(
        "MODEL 'm'; VERSION LAST; LIST T t RESTRICTIONS: (a 'x' b true) OR (NOT c 'y') OR (d >= 1); OUTPUT t;",
    )
    .unwrap();
    let text = format_query(&ored);
    assert!(
        text.contains("    (a 'x' b true) OR (NOT c 'y') OR (d >= 1);\n"),
        "{text}"
    );
    assert_eq!(parse_query(&text).unwrap(), ored);
}

#[test]
fn uppercase_reference_target_survives_formatting() {
    let ast = parse_query(
        "MODEL 'm'; VERSION LAST; LIST E e RESTRICTIONS: (Child ^HANDLER); LIST T HANDLER; OUTPUT e;",
    )
    .unwrap();
    assert!(matches!(
        &conj(&ast.templates[0])[0].body,
        RestrictionBody::Ref(_)
    ));
    assert_eq!(parse_query(&format_query(&ast)).unwrap(), ast);
}

#[test]
fn metrics_minimal_query() {
    // Hand count: MODEL(5) "m"(1) ;(1) VERSION(7) _(1) LAST(4) ;(1) LIST(4) _(1) T(1) _(1)
    // t(1) ;(1) OUTPUT(6) _(1) t(1) ;(1) = 38.
    let m = query_metrics(MINIMAL_QUERY).unwrap();
    assert_eq!(
        m,
        QueryMetrics {
            query_count: 1,
            output_count: 1,
            char_count: 38,
            keyword_total: 5,
            keyword_unique: 5,
        }
    );
}

#[test]
fn metrics_running_example() {
    // Keywords: MODEL VERSION LAST LIST RESTRICTIONS EXISTS LIST RESTRICTIONS OUTPUT OUTPUT.
    // Characters, line by line: 7 + 13 + 22 + 5 + 22 + 13 + 9 + 9 = 100.
    let m = query_metrics(RUNNING_QUERY).unwrap();
    assert_eq!(m.output_count, 2);
    assert_eq!(m.keyword_total, 10);
    assert_eq!(m.keyword_unique, 7);
    assert_eq!(m.char_count, 100);
}

#[test]
fn metrics_ignore_comments_and_layout() {
    let noisy = "// leading\nMODEL   \"m\" ;\n\n  VERSION LAST ; // trailing\nLIST T\n t;\tOUTPUT t;";
    assert_eq!(
        query_metrics(noisy).unwrap(),
        query_metrics(MINIMAL_QUERY).unwrap()
    );
}

#[test]
fn expected_at_end_for_prefixes() {
    let e = expected_at_end("MODEL 'm'; VERSION ").unwrap();
    assert!(e.contains(&Expected::Keyword(Keyword::First)));
    assert!(e.contains(&Expected::Keyword(Keyword::Last)));
    assert!(e.contains(&Expected::Punct(Punct::Le)));
    let e = expected_at_end("MODEL 'm'; VERSION LAST; LIST ").unwrap();
    assert_eq!(e, [Expected::Ident(IdentRole::TypeName)]);
    assert!(expected_at_end("MODEL 'm'; LIST").is_none());
}

// Random sentences straight from the grammar, with noise in the layout.

const NAMES: [&str; 6] = ["Name", "size", "Kind", "_x1", "flag", "Parent"];
const TEMPLATE_IDS: [&str; 5] = ["a", "serverComponent", "t_2", "HANDLER", "LIST"];

struct Gen {
    rng: ChaCha8Rng,
    out: String,
}

impl Gen {
    fn sep(&mut self) {
        match self.rng.gen_range(0..10) {
            0 => self.out.push_str("\n\t"),
            1 => self.out.push_str(" // note\n"),
            2 => self.out.push_str("  "),
            _ => self.out.push(' '),
        }
    }

    fn tok(&mut self, s: &str) {
        self.out.push_str(s);
        self.sep();
    }

    fn pick<'a>(&mut self, items: &[&'a str]) -> &'a str {
        items[self.rng.gen_range(0..items.len())]
    }

    fn template_ref(&mut self) {
        let id = self.pick(&TEMPLATE_IDS);
        let text = if is_keyword(id) || id == "HANDLER" {
            format!("^{id}")
        } else {
            id.to_string()
        };
        self.tok(&text);
    }

    fn int_arith(&mut self, depth: u32) {
        let n = self.rng.gen_range(1..3);
        for i in 0..n {
            if i > 0 {
                let op = self.pick(&["+", "-", "*", "/"]);
                self.tok(op);
            }
            if depth < 2 && self.rng.gen_bool(0.2) {
                self.tok("(");
                self.int_arith(depth + 1);
                self.tok(")");
            } else {
                let v: i64 = self.rng.gen_range(-50..50);
                self.tok(&v.to_string());
            }
        }
    }

    fn float_arith(&mut self) {
        let n = self.rng.gen_range(1..3);
        for i in 0..n {
            if i > 0 {
                let op = self.pick(&["+", "-", "*"]);
                self.tok(op);
            }
            let v: f64 = self.rng.gen_range(-100..100) as f64 / 4.0;
            self.tok(&crate::expr::float_literal(v));
        }
    }

    fn cmp(&mut self) {
        let op = self.pick(&["<", "<=", "=", ">", ">="]);
        self.tok(op);
    }

    fn member(&mut self) {
        if self.rng.gen_bool(0.3) {
            self.tok("NOT");
        }
        let name = self.pick(&NAMES);
        match self.rng.gen_range(0..8) {
            0 => {
                self.tok(name);
                let b = self.pick(&["true", "false"]);
                self.tok(b);
            }
            1 => {
                self.tok(name);
                let s = self.pick(&["'server'", "\".*Handler\"", "'a|b'", "'[0-9]+'"]);
                self.tok(s);
            }
            2 => {
                self.tok(name);
                self.cmp();
                self.int_arith(0);
            }
            3 => {
                self.tok(name);
                self.cmp();
                self.float_arith();
            }
            4 => {
                self.tok(name);
                self.cmp();
                self.tok("2021-06-30T12:00:00");
            }
            5 => {
                self.tok(name);
                let lit = self.pick(&["CLASS", "SUBSYSTEM", "A_1"]);
                self.tok(lit);
            }
            6 => {
                let q = self.pick(&["EXISTS", "FOR_ALL", "COUNT(3)", "RANGE(0, 2)", "RANGE(1,1)"]);
                self.tok(q);
                self.tok(name);
                self.template_ref();
            }
            _ => {
                self.tok(name);
                self.template_ref();
            }
        }
    }

    fn query(mut self) -> String {
        self.tok("MODEL");
        let path = self.pick(&["\"system.model\"", "'m.json'", "\"{corresponding model}\""]);
        self.tok(path);
        self.tok(";");
        self.tok("VERSION");
        match self.rng.gen_range(0..3) {
            0 => self.tok("FIRST"),
            1 => self.tok("LAST"),
            _ => {
                self.cmp();
                self.int_arith(0);
            }
        }
        self.tok(";");
        for _ in 0..self.rng.gen_range(0..4) {
            self.tok("LIST");
            let ty = self.pick(&["TechnicalComponent", "Component", "ComponentEdge"]);
            self.tok(ty);
            self.template_ref();
            if self.rng.gen_bool(0.7) {
                self.tok("RESTRICTIONS:");
                for g in 0..self.rng.gen_range(1..4) {
                    if g > 0 {
                        self.tok("OR");
                    }
                    self.tok("(");
                    for _ in 0..self.rng.gen_range(1..4) {
                        self.member();
                    }
                    self.tok(")");
                }
            }
            self.tok(";");
        }
        for _ in 0..self.rng.gen_range(1..4) {
            self.tok("OUTPUT");
            self.template_ref();
            if self.rng.gen_bool(0.3) {
                self.tok("ORDER_BY");
                self.tok("Name");
                self.tok("ASC");
                self.tok(",");
                self.tok("size");
                self.tok("DESC");
            }
            if self.rng.gen_bool(0.3) {
                self.tok("ATTRIBUTE");
                self.tok("Name");
                self.tok(",");
                self.tok("Kind");
            }
            self.tok(";");
        }
        self.out
    }
}

fn sentence(seed: u64) -> String {
    Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        out: String::new(),
    }
    .query()
}

proptest! {
    #[test]
    fn grammar_sentences_parse(seed in any::<u64>()) {
        let text = sentence(seed);
        prop_assert!(parse_query(&text).is_ok(), "{}\n{:?}", text, parse_query(&text).err());
    }

    #[test]
    fn format_round_trip(seed in any::<u64>()) {
        let ast = parse_query(&sentence(seed)).unwrap();
        let again = parse_query(&format_query(&ast)).unwrap();
        prop_assert_eq!(again, ast);
    }

    #[test]
    fn extra_output_increments_count(seed in any::<u64>()) {
        let text = sentence(seed);
        let before = query_metrics(&text).unwrap();
        let after = query_metrics(&format!("{text}\nOUTPUT a;")).unwrap();
        prop_assert_eq!(after.output_count, before.output_count + 1);
        prop_assert!(after.keyword_total >= before.keyword_total);
        prop_assert!(after.keyword_unique <= after.keyword_total);
    }

    #[test]
    fn errors_point_inside_offending_lexeme(seed in any::<u64>(), cut in 0.0f64..1.0) {
        let text = sentence(seed);
        let tokens = tokenize(&text).unwrap();
        // Drop one token and check where the parser complains.
        let victim = ((tokens.len() - 1) as f64 * cut) as usize;
        let span = tokens[victim].span;
        let broken = format!("{}{}", &text[..span.start], &text[span.end..]);
        if let Err(e) = parse_query(&broken) {
            if !e.at_eof {
                let lexeme_start = e.span.start;
                prop_assert!(e.span.contains(lexeme_start));
                prop_assert!(e.span.end <= broken.len());
                prop_assert!(!broken[e.span.start..e.span.end].trim().is_empty());
            }
        }
    }
}
