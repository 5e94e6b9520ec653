//! Few-shot inference of a rare word's vector from a handful of parsed
//! context sentences.
//!
//! All three methods start from the weighted context term
//! `s(c) · r(c) · (v_c − k·g)` where `g` is the noise-weighted mean vector:
//!
//! - Additive sums the terms.
//! - Dependency Additive scales each term by `1 + 1/d`, `d` being the number
//!   of arcs between the slot and the context word.
//! - Dependency-Matrix Additive maps each term through the product of the
//!   dependency matrices along the path from the slot to the context word.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::{subsample_weight, window_weight, DirectedLabel, NoiseDistribution, ParsedSentence};
use crate::error::{Error, Result};
use crate::linalg::{axpy, mat_vec};
use crate::spaces::{DependencyMatrixSet, EmbeddingSpace};
use crate::stopwords::StopWords;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Additive,
    DepAdditive,
    DmAdditive,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Additive, Method::DepAdditive, Method::DmAdditive];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Additive => "additive",
            Method::DepAdditive => "dep-additive",
            Method::DmAdditive => "dm-additive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown inference method {s:?}")))
    }
}

/// Order in which the matrices on a dependency path are applied to a context term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainOrder {
    /// The matrix of the arc nearest the context word is applied first.
    #[default]
    ContextFirst,
    /// The matrix of the arc nearest the slot is applied first.
    TargetFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FslConfig {
    pub tau: f64,
    pub negatives: usize,
    pub window: usize,
    pub stopwords: StopWords,
    pub method: Method,
    pub chain_order: ChainOrder,
}

impl Default for FslConfig {
    fn default() -> Self {
        FslConfig {
            tau: 1e-6,
            negatives: 15,
            window: 5,
            stopwords: StopWords::english(),
            method: Method::Additive,
            chain_order: ChainOrder::ContextFirst,
        }
    }
}

impl FslConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::InvalidConfig("tau must be positive".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Context sentences of one rare word, each with the slot position marked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotContext {
    sentences: Vec<ParsedSentence>,
    target_positions: Vec<u32>,
    target_form: String,
}

impl FewShotContext {
    /// Locates the slot in every sentence (first occurrence of `target_form`).
    pub fn new(sentences: Vec<ParsedSentence>, target_form: &str) -> Result<Self> {
        let target_positions = sentences
            .iter()
            .map(|s| {
                s.tokens()
                    .iter()
                    .find(|t| t.form == target_form)
                    .map(|t| t.index)
                    .ok_or_else(|| Error::MissingSlot(target_form.into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FewShotContext {
            sentences,
            target_positions,
            target_form: target_form.into(),
        })
    }

    pub fn from_parts(
        sentences: Vec<ParsedSentence>,
        target_positions: Vec<u32>,
        target_form: &str,
    ) -> Result<Self> {
        if sentences.len() != target_positions.len() {
            return Err(Error::ShapeMismatch {
                expected: sentences.len(),
                found: target_positions.len(),
            });
        }
        for (s, &p) in sentences.iter().zip(&target_positions) {
            match s.token(p) {
                Some(t) if t.form == target_form => {}
                _ => return Err(Error::MissingSlot(target_form.into())),
            }
        }
        Ok(FewShotContext {
            sentences,
            target_positions,
            target_form: target_form.into(),
        })
    }

    pub fn sentences(&self) -> &[ParsedSentence] {
        &self.sentences
    }

    pub fn target_positions(&self) -> &[u32] {
        &self.target_positions
    }

    pub fn target_form(&self) -> &str {
        &self.target_form
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// The context restricted to the sentences at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        FewShotContext {
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
            target_positions: indices.iter().map(|&i| self.target_positions[i]).collect(),
            target_form: self.target_form.clone(),
        }
    }

    /// The first `n` sentences.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        FewShotContext {
            sentences: self.sentences[..n].to_vec(),
            target_positions: self.target_positions[..n].to_vec(),
            target_form: self.target_form.clone(),
        }
    }

    /// Concatenates the sentences of several contexts.
    pub fn concat<'a, I: IntoIterator<Item = &'a FewShotContext>>(parts: I, target_form: &str) -> Self {
        let mut sentences = Vec::new();
        let mut target_positions = Vec::new();
        for p in parts {
            sentences.extend_from_slice(&p.sentences);
            target_positions.extend_from_slice(&p.target_positions);
        }
        FewShotContext {
            sentences,
            target_positions,
            target_form: target_form.into(),
        }
    }
}

/// `g = Σ_w n(w) · v_w`
#[derive(Debug, Clone, PartialEq)]
pub struct NegSamplingVector(pub Vec<f64>);

pub fn negative_sampling_vector(space: &EmbeddingSpace, noise: &NoiseDistribution) -> Result<NegSamplingVector> {
    if noise.len() != space.len() {
        return Err(Error::Misaligned);
    }
    let mut g = vec![0.0; space.dim()];
    for (row, &p) in space.rows().zip(noise.probabilities()) {
        for (gi, &x) in g.iter_mut().zip(row) {
            *gi += p * x as f64;
        }
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("negative sampling vector"));
    }
    Ok(NegSamplingVector(g))
}

/// `s(c) · r(c) · (v_c − k·g)` for the word `id` found `m` tokens from the slot.
pub fn context_term(space: &EmbeddingSpace, id: u32, m: usize, g: &NegSamplingVector, cfg: &FslConfig) -> Result<Vec<f64>> {
    let weight = context_weight(space, id, m, cfg)?;
    let mut out = vec![0.0; space.dim()];
    if weight == 0.0 {
        return Ok(out);
    }
    let k = cfg.negatives as f64;
    for ((o, &v), &gi) in out.iter_mut().zip(space.vector(id)).zip(&g.0) {
        *o = weight * (v as f64 - k * gi);
    }
    Ok(out)
}

fn context_weight(space: &EmbeddingSpace, id: u32, m: usize, cfg: &FslConfig) -> Result<f64> {
    Ok(subsample_weight(space.vocab().rel_freq(id), cfg.tau)? * window_weight(m, cfg.window))
}

/// Number of arcs between two tokens, ignoring direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Hops(d) => write!(f, "{d}"),
            Distance::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// `1 + 1/d`; unreachable words keep the limiting weight 1.
pub fn dep_weight(d: Distance) -> Result<f64> {
    match d {
        Distance::Hops(0) => Err(Error::ZeroDistance),
        Distance::Hops(d) => Ok(1.0 + 1.0 / d as f64),
        Distance::Unreachable => Ok(1.0),
    }
}

/// Undirected view of a parse: neighbors in ascending token order.
struct ArcGraph {
    // 0-based positions
    neighbors: Vec<Vec<u32>>,
}

impl ArcGraph {
    fn new(sentence: &ParsedSentence) -> Self {
        let mut neighbors = vec![Vec::new(); sentence.len()];
        for arc in sentence.arcs() {
            let (h, d) = (arc.head - 1, arc.dependent - 1);
            neighbors[h as usize].push(d);
            neighbors[d as usize].push(h);
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        ArcGraph { neighbors }
    }

    /// Hop counts from `from` to every position, `u32::MAX` when unreachable.
    fn bfs(&self, from: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.neighbors.len()];
        let mut queue = VecDeque::new();
        dist[from as usize] = 0;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

fn check_index(sentence: &ParsedSentence, i: u32) -> Result<()> {
    if i == 0 || i as usize > sentence.len() {
        Err(Error::InvalidIndex(i as usize))
    } else {
        Ok(())
    }
}

fn to_distance(d: u32) -> Distance {
    if d == u32::MAX {
        Distance::Unreachable
    } else {
        Distance::Hops(d)
    }
}

/// Shortest undirected path length between 1-based token indices `i` and `j`.
pub fn dependency_distance(sentence: &ParsedSentence, i: u32, j: u32) -> Result<Distance> {
    check_index(sentence, i)?;
    check_index(sentence, j)?;
    Ok(to_distance(ArcGraph::new(sentence).bfs(i - 1)[j as usize - 1]))
}

/// Label of the arc between adjacent tokens `a` and `b` (1-based) as seen
/// walking from `a` to `b`: head-to-dependent keeps the label, the other way
/// inverts it.
fn step_label(sentence: &ParsedSentence, a: u32, b: u32) -> DirectedLabel {
    let tb = &sentence.tokens()[b as usize - 1];
    if tb.head == a {
        DirectedLabel::forward(tb.deprel.as_str())
    } else {
        DirectedLabel::inverse(sentence.tokens()[a as usize - 1].deprel.as_str())
    }
}

fn path_with(graph: &ArcGraph, sentence: &ParsedSentence, i: u32, j: u32) -> Option<Vec<DirectedLabel>> {
    // Distances to j; walking from i along strictly decreasing distance and
    // taking the smallest index at each step gives the lexicographically
    // smallest shortest path.
    let to_j = graph.bfs(j - 1);
    let mut at = i - 1;
    if to_j[at as usize] == u32::MAX {
        return None;
    }
    let mut labels = Vec::with_capacity(to_j[at as usize] as usize);
    while at != j - 1 {
        let next = *graph.neighbors[at as usize]
            .iter()
            .find(|&&n| to_j[n as usize] == to_j[at as usize] - 1)
            .expect("bfs predecessor");
        labels.push(step_label(sentence, at + 1, next + 1));
        at = next;
    }
    Some(labels)
}

/// Directed labels along the shortest path from `i` to `j`; `None` when
/// unreachable, empty when `i == j`. Ties go to the smaller intermediate index.
pub fn dependency_path(sentence: &ParsedSentence, i: u32, j: u32) -> Result<Option<Vec<DirectedLabel>>> {
    check_index(sentence, i)?;
    check_index(sentence, j)?;
    Ok(path_with(&ArcGraph::new(sentence), sentence, i, j))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    TargetSlot,
    StopWord,
    OutOfVocabulary,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::TargetSlot => "slot",
            SkipReason::StopWord => "stopword",
            SkipReason::OutOfVocabulary => "oov",
        })
    }
}

/// What happened to one context token during inference.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextDiagnostic {
    /// 0-based sentence number within the context.
    pub sentence: usize,
    pub index: u32,
    pub form: String,
    pub skipped: Option<SkipReason>,
    /// Surface offset from the slot.
    pub offset: usize,
    pub distance: Distance,
    /// Path from the slot (dm-additive only).
    pub path: Option<Vec<DirectedLabel>>,
    /// Scalar multiplier on `v_c − k·g`: `s·r`, times `1 + 1/d` for dep-additive.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub vector: Vec<f64>,
    pub diagnostics: Vec<ContextDiagnostic>,
}

impl Inference {
    pub fn used(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.skipped.is_none()).count()
    }

    pub fn skipped_oov(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.skipped == Some(SkipReason::OutOfVocabulary))
            .count()
    }
}

/// A background space with its cached negative-sampling vector.
#[derive(Debug, Clone)]
pub struct Inferencer<'a> {
    space: &'a EmbeddingSpace,
    matrices: Option<&'a DependencyMatrixSet>,
    g: NegSamplingVector,
    cfg: FslConfig,
}

impl<'a> Inferencer<'a> {
    pub fn new(space: &'a EmbeddingSpace, matrices: Option<&'a DependencyMatrixSet>, cfg: FslConfig) -> Result<Self> {
        cfg.validate()?;
        if space.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if let Some(m) = matrices {
            if m.dim() != space.dim() {
                return Err(Error::ShapeMismatch {
                    expected: space.dim(),
                    found: m.dim(),
                });
            }
        }
        if cfg.method == Method::DmAdditive && matrices.is_none() {
            return Err(Error::InvalidConfig("dm-additive needs dependency matrices".into()));
        }
        let noise = NoiseDistribution::from_vocab(space.vocab())?;
        let g = negative_sampling_vector(space, &noise)?;
        Ok(Inferencer { space, matrices, g, cfg })
    }

    pub fn space(&self) -> &'a EmbeddingSpace {
        self.space
    }

    pub fn config(&self) -> &FslConfig {
        &self.cfg
    }

    pub fn negative_sampling_vector(&self) -> &NegSamplingVector {
        &self.g
    }

    /// The same background with another method; `g` is reused.
    pub fn with_method(&self, method: Method) -> Result<Self> {
        if method == Method::DmAdditive && self.matrices.is_none() {
            return Err(Error::InvalidConfig("dm-additive needs dependency matrices".into()));
        }
        let mut next = self.clone();
        next.cfg.method = method;
        Ok(next)
    }

    pub fn infer(&self, context: &FewShotContext) -> Result<Vec<f64>> {
        self.infer_with_diagnostics(context).map(|i| i.vector)
    }

    pub fn infer_with_diagnostics(&self, context: &FewShotContext) -> Result<Inference> {
        let dim = self.space.dim();
        let method = self.cfg.method;
        let mut vector = vec![0.0; dim];
        let mut term = vec![0.0; dim];
        let mut scratch = vec![0.0; dim];
        let mut diagnostics = Vec::new();
        let k = self.cfg.negatives as f64;

        for (si, (sentence, &slot)) in context.sentences.iter().zip(&context.target_positions).enumerate() {
            let graph = ArcGraph::new(sentence);
            let from_slot = graph.bfs(slot - 1);
            for token in sentence.tokens() {
                if token.index == slot {
                    continue;
                }
                let offset = token.index.abs_diff(slot) as usize;
                let distance = to_distance(from_slot[token.index as usize - 1]);
                let mut diag = ContextDiagnostic {
                    sentence: si,
                    index: token.index,
                    form: token.form.clone(),
                    skipped: None,
                    offset,
                    distance,
                    path: None,
                    weight: 0.0,
                };
                let id = if token.form == context.target_form {
                    diag.skipped = Some(SkipReason::TargetSlot);
                    None
                } else if self.cfg.stopwords.contains(&token.form) {
                    diag.skipped = Some(SkipReason::StopWord);
                    None
                } else {
                    let id = self.space.vocab().lookup(&token.form);
                    if id.is_none() {
                        diag.skipped = Some(SkipReason::OutOfVocabulary);
                    }
                    id
                };
                let Some(id) = id else {
                    diagnostics.push(diag);
                    continue;
                };

                let mut weight = context_weight(self.space, id, offset, &self.cfg)?;
                if method == Method::DepAdditive {
                    weight *= dep_weight(distance)?;
                }
                diag.weight = weight;
                if weight != 0.0 {
                    for ((t, &v), &gi) in term.iter_mut().zip(self.space.vector(id)).zip(&self.g.0) {
                        *t = weight * (v as f64 - k * gi);
                    }
                    if method == Method::DmAdditive {
                        let path = path_with(&graph, sentence, slot, token.index);
                        if let Some(labels) = &path {
                            self.apply_chain(labels, &mut term, &mut scratch);
                        }
                        diag.path = path;
                    }
                    axpy(1.0, &term, &mut vector);
                } else if method == Method::DmAdditive {
                    diag.path = path_with(&graph, sentence, slot, token.index);
                }
                diagnostics.push(diag);
            }
        }
        let inference = Inference { vector, diagnostics };
        if inference.used() == 0 {
            return Err(Error::EmptyContext);
        }
        if inference.vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("inferred vector"));
        }
        Ok(inference)
    }

    fn apply_chain(&self, labels: &[DirectedLabel], term: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        let matrices = self.matrices.expect("checked in Inferencer::new");
        let dim = self.space.dim();
        let mut m64 = vec![0.0; dim * dim];
        let mut apply = |label: &DirectedLabel, term: &mut Vec<f64>, scratch: &mut Vec<f64>| {
            // Labels never seen in training act as the identity.
            if let Some(m) = matrices.matrix(label) {
                for (d, &s) in m64.iter_mut().zip(m) {
                    *d = s as f64;
                }
                mat_vec(&m64, term, scratch);
                core::mem::swap(term, scratch);
            }
        };
        match self.cfg.chain_order {
            ChainOrder::ContextFirst => labels.iter().rev().for_each(|l| apply(l, term, scratch)),
            ChainOrder::TargetFirst => labels.iter().for_each(|l| apply(l, term, scratch)),
        }
    }
}

fn with_method<'a>(
    space: &'a EmbeddingSpace,
    matrices: Option<&'a DependencyMatrixSet>,
    cfg: &FslConfig,
    method: Method,
) -> Result<Inferencer<'a>> {
    Inferencer::new(space, matrices, FslConfig { method, ..cfg.clone() })
}

pub fn infer_additive(context: &FewShotContext, space: &EmbeddingSpace, cfg: &FslConfig) -> Result<Vec<f64>> {
    with_method(space, None, cfg, Method::Additive)?.infer(context)
}

pub fn infer_dep_additive(context: &FewShotContext, space: &EmbeddingSpace, cfg: &FslConfig) -> Result<Vec<f64>> {
    with_method(space, None, cfg, Method::DepAdditive)?.infer(context)
}

pub fn infer_dm_additive(
    context: &FewShotContext,
    space: &EmbeddingSpace,
    matrices: &DependencyMatrixSet,
    cfg: &FslConfig,
) -> Result<Vec<f64>> {
    with_method(space, Some(matrices), cfg, Method::DmAdditive)?.infer(context)
}
