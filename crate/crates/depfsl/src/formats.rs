//! Vocabulary files, the binary space/matrix format and the text export.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! "DFEW" | version u32 | dim u32 | rows u32 | kind u32 (0 space, 1 matrices)
//! space:    flags u32 (bit 0 lowercase, bit 1 context block) | min_count u64
//!           rows × (len u32, UTF-8 word, count u64) | rows × dim f32
//!           [context block: rows u32 | flags u32 | min_count u64 | entries | payload]
//! matrices: rows × (len u32, UTF-8 label) | rows × dim × dim f32
//! ```
//!
//! Inverse labels are written as `label^-1`.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use depfsl_core::corpus::{DirectedLabel, Vocabulary};
use depfsl_core::spaces::{ContextVectors, DependencyMatrixSet, EmbeddingSpace};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DFEW";
pub const VERSION: u32 = 1;
const KIND_SPACE: u32 = 0;
const KIND_MATRICES: u32 = 1;
const FLAG_LOWERCASE: u32 = 1;
const FLAG_CONTEXTS: u32 = 2;

// ---- vocabulary text file

pub fn write_vocab<W: Write>(out: &mut W, vocab: &Vocabulary) -> io::Result<()> {
    writeln!(out, "#total {}", vocab.total())?;
    writeln!(out, "#min_count {}", vocab.min_count())?;
    writeln!(out, "#lowercase {}", vocab.lowercase())?;
    for (w, c) in vocab.iter() {
        writeln!(out, "{w}\t{c}")?;
    }
    Ok(())
}

pub fn write_vocab_file(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut buf = Vec::new();
    write_vocab(&mut buf, vocab).expect("writing to memory");
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn parse_vocab(text: &str, source: &Path) -> Result<Vocabulary> {
    let mut total = None;
    let mut min_count = 1;
    let mut lowercase = true;
    let mut words = Vec::new();
    let mut counts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        if words.is_empty() {
            if let Some(v) = line.strip_prefix("#total ") {
                total = Some(parse_num::<u64>(v, source, lineno)?);
                continue;
            }
            if let Some(v) = line.strip_prefix("#min_count ") {
                min_count = parse_num(v, source, lineno)?;
                continue;
            }
            if let Some(v) = line.strip_prefix("#lowercase ") {
                lowercase = parse_num(v, source, lineno)?;
                continue;
            }
        }
        let (w, c) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::parse(source, lineno, "expected word<TAB>count"))?;
        words.push(w.to_string());
        counts.push(parse_num(c, source, lineno)?);
    }
    let total = total.ok_or_else(|| Error::parse(source, 1, "missing \"#total N\" header"))?;
    let vocab = Vocabulary::from_ordered(words, counts, min_count, lowercase)
        .map_err(|e| Error::format(source, e.to_string()))?;
    if vocab.total() != total {
        return Err(Error::format(
            source,
            format!("header total {total} does not match the sum of counts {}", vocab.total()),
        ));
    }
    Ok(vocab)
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vocab(&text, path)
}

fn parse_num<T: std::str::FromStr>(s: &str, source: &Path, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(source, line, format!("invalid value {s:?}")))
}

// ---- binary

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

fn put_f32s(buf: &mut Vec<u8>, xs: &[f32]) {
    buf.reserve(xs.len() * 4);
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
}

fn header(buf: &mut Vec<u8>, dim: usize, rows: usize, kind: u32) {
    buf.extend_from_slice(MAGIC);
    put_u32(buf, VERSION);
    put_u32(buf, dim as u32);
    put_u32(buf, rows as u32);
    put_u32(buf, kind);
}

fn put_vocab_entries(buf: &mut Vec<u8>, vocab: &Vocabulary) {
    for (w, c) in vocab.iter() {
        put_str(buf, w);
        put_u64(buf, c);
    }
}

pub fn encode_space(space: &EmbeddingSpace) -> Vec<u8> {
    let mut buf = Vec::new();
    header(&mut buf, space.dim(), space.len(), KIND_SPACE);
    let vocab = space.vocab();
    let mut flags = if vocab.lowercase() { FLAG_LOWERCASE } else { 0 };
    if space.contexts().is_some() {
        flags |= FLAG_CONTEXTS;
    }
    put_u32(&mut buf, flags);
    put_u64(&mut buf, vocab.min_count());
    put_vocab_entries(&mut buf, vocab);
    put_f32s(&mut buf, space.targets());
    if let Some(ctx) = space.contexts() {
        put_u32(&mut buf, ctx.vocab.len() as u32);
        put_u32(&mut buf, if ctx.vocab.lowercase() { FLAG_LOWERCASE } else { 0 });
        put_u64(&mut buf, ctx.vocab.min_count());
        put_vocab_entries(&mut buf, &ctx.vocab);
        put_f32s(&mut buf, &ctx.vectors);
    }
    buf
}

pub fn encode_matrices(set: &DependencyMatrixSet) -> Vec<u8> {
    let mut buf = Vec::new();
    header(&mut buf, set.dim(), set.len(), KIND_MATRICES);
    for l in set.labels() {
        put_str(&mut buf, &l.to_string());
    }
    put_f32s(&mut buf, set.data());
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(self.path, format!("truncated file at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::format(self.path, "invalid UTF-8 string"))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| Error::format(self.path, "size overflow"))?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn header(&mut self, kind: u32) -> Result<(usize, usize)> {
        if self.take(4)? != MAGIC {
            return Err(Error::format(self.path, "not a DFEW file (bad magic)"));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(Error::Version {
                path: self.path.to_path_buf(),
                found: version,
                expected: VERSION,
            });
        }
        let dim = self.u32()? as usize;
        let rows = self.u32()? as usize;
        let found = self.u32()?;
        if found != kind {
            let what = |k| if k == KIND_SPACE { "an embedding space" } else { "a matrix set" };
            return Err(Error::format(
                self.path,
                format!("expected {}, found {}", what(kind), what(found)),
            ));
        }
        Ok((dim, rows))
    }

    fn vocab(&mut self, rows: usize, flags: u32, min_count: u64) -> Result<Vocabulary> {
        let mut words = Vec::with_capacity(rows.min(1 << 20));
        let mut counts = Vec::with_capacity(rows.min(1 << 20));
        for _ in 0..rows {
            words.push(self.string()?);
            counts.push(self.u64()?);
        }
        Vocabulary::from_ordered(words, counts, min_count, flags & FLAG_LOWERCASE != 0)
            .map_err(|e| Error::format(self.path, e.to_string()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.path,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

fn core_err(path: &Path) -> impl Fn(depfsl_core::Error) -> Error + '_ {
    move |e| Error::format(path, e.to_string())
}

pub fn decode_space(bytes: &[u8], path: &Path) -> Result<EmbeddingSpace> {
    let mut r = Reader { bytes, pos: 0, path };
    let (dim, rows) = r.header(KIND_SPACE)?;
    let flags = r.u32()?;
    let min_count = r.u64()?;
    let vocab = r.vocab(rows, flags, min_count)?;
    let targets = r.f32s(rows * dim)?;
    let mut space = EmbeddingSpace::new(vocab, dim, targets).map_err(core_err(path))?;
    if flags & FLAG_CONTEXTS != 0 {
        let rows = r.u32()? as usize;
        let cflags = r.u32()?;
        let cmin = r.u64()?;
        let vocab = r.vocab(rows, cflags, cmin)?;
        let vectors = r.f32s(rows * dim)?;
        space = space
            .with_contexts(ContextVectors { vocab, vectors })
            .map_err(core_err(path))?;
    }
    r.finish()?;
    Ok(space)
}

pub fn decode_matrices(bytes: &[u8], path: &Path) -> Result<DependencyMatrixSet> {
    let mut r = Reader { bytes, pos: 0, path };
    let (dim, rows) = r.header(KIND_MATRICES)?;
    let mut labels = Vec::with_capacity(rows.min(1 << 16));
    for _ in 0..rows {
        let s = r.string()?;
        labels.push(s.parse::<DirectedLabel>().map_err(core_err(path))?);
    }
    let data = r.f32s(rows * dim * dim)?;
    r.finish()?;
    DependencyMatrixSet::new(dim, labels, data).map_err(core_err(path))
}

pub fn write_space(path: &Path, space: &EmbeddingSpace) -> Result<()> {
    fs::write(path, encode_space(space)).map_err(|e| Error::io(path, e))
}

pub fn read_space(path: &Path) -> Result<EmbeddingSpace> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_space(&bytes, path)
}

pub fn write_matrices(path: &Path, set: &DependencyMatrixSet) -> Result<()> {
    fs::write(path, encode_matrices(set)).map_err(|e| Error::io(path, e))
}

pub fn read_matrices(path: &Path) -> Result<DependencyMatrixSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrices(&bytes, path)
}

// ---- text export

/// `"<rows> <dim>"` header, then `word v1 … v_dim` per line.
pub fn write_text_rows<W, I, S, X>(out: &mut W, dim: usize, rows: I) -> io::Result<()>
where
    W: Write,
    I: ExactSizeIterator<Item = (S, X)>,
    S: Display,
    X: AsRef<[f64]>,
{
    writeln!(out, "{} {}", rows.len(), dim)?;
    for (word, v) in rows {
        write!(out, "{word}")?;
        for x in v.as_ref() {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_text_space<W: Write>(out: &mut W, space: &EmbeddingSpace) -> io::Result<()> {
    writeln!(out, "{} {}", space.len(), space.dim())?;
    for (word, v) in space.vocab().words().iter().zip(space.rows()) {
        write!(out, "{word}")?;
        for x in v {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn parse_text_rows(text: &str, source: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut lines = text.lines().enumerate();
    let (_, head) = lines.next().ok_or_else(|| Error::parse(source, 1, "empty file"))?;
    let mut parts = head.split_whitespace();
    let mut next_num = || -> Result<usize> { parse_num(parts.next().unwrap_or(""), source, 1) };
    let rows = next_num()?;
    let dim = next_num()?;
    let mut out = Vec::with_capacity(rows);
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default().to_string();
        let v = fields
            .map(|f| parse_num::<f64>(f, source, i + 1))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != dim {
            return Err(Error::parse(source, i + 1, format!("expected {dim} values, found {}", v.len())));
        }
        out.push((word, v));
    }
    if out.len() != rows {
        return Err(Error::format(source, format!("header says {rows} rows, found {}", out.len())));
    }
    Ok(out)
}
