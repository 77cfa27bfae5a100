//! Plain `key = value` text blocks used by dataset manifests and classifier specs.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are skipped.
pub(crate) fn parse(text: &str, origin: &str) -> Result<Vec<Entry>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
            origin: origin.to_string(),
            line,
            message: format!("expected `key = value`, got `{trimmed}`"),
        })?;
        let key = key.trim().to_ascii_lowercase();
        if key.is_empty() {
            return Err(Error::Config {
                origin: origin.to_string(),
                line,
                message: "empty key".into(),
            });
        }
        if !seen.insert(key.clone()) {
            return Err(Error::Config {
                origin: origin.to_string(),
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        out.push(Entry {
            line,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

pub(crate) fn config_err(origin: &str, entry: &Entry, message: impl Into<String>) -> Error {
    Error::Config {
        origin: origin.to_string(),
        line: entry.line,
        message: message.into(),
    }
}

pub(crate) fn parse_bool(origin: &str, entry: &Entry) -> Result<bool> {
    match entry.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(config_err(
            origin,
            entry,
            format!("`{}` expects true/false, got `{other}`", entry.key),
        )),
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(origin: &str, entry: &Entry) -> Result<T> {
    entry.value.parse::<T>().map_err(|_| {
        config_err(
            origin,
            entry,
            format!("`{}` has invalid value `{}`", entry.key, entry.value),
        )
    })
}

/// Accepts `[3, 2]`, `3, 2` or `3 2`. An empty list or `all` yields an empty vector.
pub fn parse_index_list(text: &str) -> std::result::Result<Vec<usize>, String> {
    let inner = text
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .trim();
    if inner.is_empty() || inner.eq_ignore_ascii_case("all") {
        return Ok(Vec::new());
    }
    inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| format!("`{s}` is not a column index"))
        })
        .collect()
}
