//! CoNLL-U reading and writing.
//!
//! Only ID, FORM, HEAD and DEPREL are used. Multiword-token ranges (`3-4`)
//! and empty nodes (`5.1`) are skipped. A HEAD of `_` reads as 0.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use depfsl_core::corpus::{ParsedSentence, Token};

use crate::error::{Error, Result};

pub fn parse_conllu(text: &str, source: &Path) -> Result<Vec<ParsedSentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut start = 0;
    let mut finish = |tokens: &mut Vec<Token>, start: usize| -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        let s = ParsedSentence::new(std::mem::take(tokens)).map_err(|e| Error::parse(source, start, e.to_string()))?;
        sentences.push(s);
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            finish(&mut tokens, start)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: u32 = id
            .parse()
            .map_err(|_| Error::parse(source, lineno, format!("invalid token id {id:?}")))?;
        let head: u32 = match cols[6] {
            "_" => 0,
            h => h
                .parse()
                .map_err(|_| Error::parse(source, lineno, format!("invalid head {h:?}")))?,
        };
        if tokens.is_empty() {
            start = lineno;
        }
        tokens.push(Token::new(index, cols[1], head, cols[7]));
    }
    finish(&mut tokens, start)?;
    Ok(sentences)
}

pub fn read_conllu(path: &Path) -> Result<Vec<ParsedSentence>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(&text, path)
}

/// `*.conllu` files of a directory in name order, or a single file.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        if p.extension().is_some_and(|x| x == "conllu") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// All sentences of a file or a directory of `*.conllu` files.
pub fn read_corpus(path: &Path) -> Result<Vec<ParsedSentence>> {
    let mut out = Vec::new();
    for file in corpus_files(path)? {
        out.extend(read_conllu(&file)?);
    }
    Ok(out)
}

fn or_blank(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}

pub fn write_conllu<W: Write>(out: &mut W, sentences: &[ParsedSentence]) -> io::Result<()> {
    for s in sentences {
        for t in s.tokens() {
            writeln!(
                out,
                "{}\t{}\t_\t_\t_\t_\t{}\t{}\t_\t_",
                t.index,
                t.form,
                t.head,
                or_blank(&t.deprel)
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn to_conllu_string(sentences: &[ParsedSentence]) -> String {
    let mut buf = Vec::new();
    write_conllu(&mut buf, sentences).expect("writing to memory");
    String::from_utf8(buf).expect("forms are UTF-8")
}

pub fn write_conllu_file(path: &Path, sentences: &[ParsedSentence]) -> Result<()> {
    fs::write(path, to_conllu_string(sentences)).map_err(|e| Error::io(path, e))
}
