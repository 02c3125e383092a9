//! Small helpers shared by the line-oriented file parsers.

use crate::{Error, Result};

/// Non-empty, comment-stripped lines with their 1-based line numbers.
pub(crate) fn lines(input: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    input.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

pub(crate) fn number<T: std::str::FromStr>(src: &str, line: usize, what: &str, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(src, line, format!("invalid {what} `{tok}`")))
}
