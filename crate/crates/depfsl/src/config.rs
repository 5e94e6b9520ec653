//! `key = value` configuration files.

use std::path::Path;

use crate::error::{Error, Result};

/// Pairs in file order. Blank lines and `#` comments are ignored.
pub fn parse_key_values(text: &str, source: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(source, i + 1, format!("expected key = value, found {line:?}")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::parse(source, i + 1, "empty key"));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}
