use std::fs;
use std::path::Path;

use depfsl_core::stopwords::StopWords;

use crate::error::{Error, Result};

/// One word per line; `#` starts a comment line.
pub fn read_stopwords(path: &Path) -> Result<StopWords> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(StopWords::from_words(
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#')),
    ))
}
