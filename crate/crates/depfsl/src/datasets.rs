//! Evaluation dataset manifests. Paths inside a manifest are relative to the
//! manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use depfsl_core::eval::{ChimeraItem, CrwItem, DnItem};
use depfsl_core::fewshot::FewShotContext;

use crate::conllu::{corpus_files, read_conllu};
use crate::error::{Error, Result};

/// Non-blank, non-comment manifest rows split on tabs, with line numbers.
fn rows(path: &Path, columns: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<String> = line.split('\t').map(str::to_string).collect();
        if cols.len() != columns {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {columns} tab-separated columns, found {}: {line:?}", cols.len()),
            ));
        }
        out.push((i + 1, cols));
    }
    Ok(out)
}

fn resolve(manifest: &Path, rel: &str) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(rel)
}

fn context(files: &[PathBuf], slot: &str, manifest: &Path, line: usize) -> Result<FewShotContext> {
    let mut sentences = Vec::new();
    for f in files {
        sentences.extend(read_conllu(f)?);
    }
    FewShotContext::new(sentences, slot).map_err(|e| Error::parse(manifest, line, e.to_string()))
}

/// `word<TAB>conllu-file` per line; each file holds one sentence with one slot.
pub fn load_dn(path: &Path, slot: &str) -> Result<Vec<DnItem>> {
    rows(path, 2)?
        .into_iter()
        .map(|(line, cols)| {
            let definition = context(&[resolve(path, &cols[1])], slot, path, line)?;
            if definition.len() != 1 {
                return Err(Error::parse(
                    path,
                    line,
                    format!("definition file holds {} sentences, expected 1", definition.len()),
                ));
            }
            Ok(DnItem {
                word: cols[0].clone(),
                definition,
            })
        })
        .collect()
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

/// `id<TAB>probe,…<TAB>score,…<TAB>dir`; `dir` holds `sent_1.conllu` … `sent_6.conllu`.
pub fn load_chimera(path: &Path, slot: &str) -> Result<Vec<ChimeraItem>> {
    rows(path, 4)?
        .into_iter()
        .map(|(line, cols)| {
            let probes: Vec<String> = split_list(&cols[1]).into_iter().map(str::to_string).collect();
            let human_scores = split_list(&cols[2])
                .into_iter()
                .map(|s| s.parse::<f64>().map_err(|_| Error::parse(path, line, format!("invalid score {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if probes.len() != human_scores.len() || probes.len() < 2 {
                return Err(Error::parse(
                    path,
                    line,
                    format!("{} probes and {} scores; need matching counts of at least 2", probes.len(), human_scores.len()),
                ));
            }
            let dir = resolve(path, &cols[3]);
            let files: Vec<PathBuf> = (1..=6)
                .map(|i| dir.join(format!("sent_{i}.conllu")))
                .filter(|p| p.is_file())
                .collect();
            if files.is_empty() {
                return Err(Error::parse(path, line, format!("no sent_N.conllu files in {}", dir.display())));
            }
            Ok(ChimeraItem {
                id: cols[0].clone(),
                sentences: context(&files, slot, path, line)?,
                probes,
                human_scores,
            })
        })
        .collect()
}

/// `rare<TAB>frequent<TAB>score<TAB>dir`; every `*.conllu` file in `dir`, in
/// name order, contributes its sentences.
pub fn load_crw(path: &Path, slot: &str) -> Result<Vec<CrwItem>> {
    rows(path, 4)?
        .into_iter()
        .map(|(line, cols)| {
            let human_score = cols[2]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(path, line, format!("invalid score {:?}", cols[2])))?;
            let dir = resolve(path, &cols[3]);
            if !dir.is_dir() {
                return Err(Error::parse(path, line, format!("{} is not a directory", dir.display())));
            }
            Ok(CrwItem {
                rare: cols[0].clone(),
                frequent: cols[1].clone(),
                human_score,
                sentences: context(&corpus_files(&dir)?, slot, path, line)?,
            })
        })
        .collect()
}
