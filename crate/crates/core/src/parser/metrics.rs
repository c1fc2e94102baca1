use std::collections::BTreeSet;

use serde::Serialize;

use super::lexer::{tokenize, TokenKind};
use super::{parse_query, ParseError};

/// Size measurements of a query document.
///
/// `char_count` counts keywords, operators and punctuation by their length,
/// every identifier, string, number or date literal as 1, and one space
/// between two tokens only where the space is needed to keep them apart.
/// Comments and layout whitespace are not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QueryMetrics {
    pub query_count: usize,
    pub output_count: usize,
    pub char_count: usize,
    pub keyword_total: usize,
    pub keyword_unique: usize,
}

pub fn query_metrics(text: &str) -> Result<QueryMetrics, ParseError> {
    let ast = parse_query(text)?;
    let tokens = tokenize(text)?;
    let mut char_count = 0;
    let mut keyword_total = 0;
    let mut unique = BTreeSet::new();
    let mut prev_ends_in_word = false;
    for t in &tokens {
        let lexeme = &text[t.span.start..t.span.end];
        let starts_word = lexeme
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
        if prev_ends_in_word && starts_word {
            char_count += 1;
        }
        char_count += match &t.kind {
            TokenKind::Keyword(k) => {
                keyword_total += 1;
                unique.insert(*k);
                k.text().len()
            }
            TokenKind::Punct(p) => p.text().len(),
            TokenKind::Ident { .. }
            | TokenKind::Str(_)
            | TokenKind::Int(_)
            | TokenKind::Float(_)
            | TokenKind::Date(_) => 1,
        };
        prev_ends_in_word = lexeme
            .chars()
            .last()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
    }
    Ok(QueryMetrics {
        query_count: 1,
        output_count: ast.outputs.len(),
        char_count,
        keyword_total,
        keyword_unique: unique.len(),
    })
}
