//! Trained embedding spaces, dependency matrices and cosine queries.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{DirectedLabel, Vocabulary};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Scalar};

/// Context-side vectors of a Skip-Gram model, with their own vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVectors {
    pub vocab: Vocabulary,
    pub vectors: Vec<f32>,
}

/// Vocabulary-aligned dense vectors, one row per word.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    vocab: Vocabulary,
    dim: usize,
    targets: Vec<f32>,
    contexts: Option<ContextVectors>,
}

fn check_rows(data: &[f32], rows: usize, dim: usize) -> Result<()> {
    if data.len() != rows * dim {
        return Err(Error::ShapeMismatch {
            expected: rows * dim,
            found: data.len(),
        });
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("embedding vectors"));
    }
    Ok(())
}

impl EmbeddingSpace {
    pub fn new(vocab: Vocabulary, dim: usize, targets: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimensionality must be at least 1"));
        }
        check_rows(&targets, vocab.len(), dim)?;
        Ok(EmbeddingSpace {
            vocab,
            dim,
            targets,
            contexts: None,
        })
    }

    pub fn with_contexts(mut self, contexts: ContextVectors) -> Result<Self> {
        check_rows(&contexts.vectors, contexts.vocab.len(), self.dim)?;
        self.contexts = Some(contexts);
        Ok(self)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, id: u32) -> &[f32] {
        let start = id as usize * self.dim;
        &self.targets[start..start + self.dim]
    }

    /// The vector of a surface form, normalized like the vocabulary.
    pub fn lookup(&self, form: &str) -> Option<&[f32]> {
        self.vocab.lookup(form).map(|id| self.vector(id))
    }

    pub fn targets(&self) -> &[f32] {
        &self.targets
    }

    pub fn contexts(&self) -> Option<&ContextVectors> {
        self.contexts.as_ref()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> + '_ {
        self.targets.chunks_exact(self.dim)
    }
}

/// One square matrix per directed dependency label.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyMatrixSet {
    dim: usize,
    labels: Vec<DirectedLabel>,
    matrices: Vec<f32>,
    index: BTreeMap<DirectedLabel, usize>,
}

impl DependencyMatrixSet {
    pub fn new(dim: usize, labels: Vec<DirectedLabel>, matrices: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimensionality must be at least 1"));
        }
        if matrices.len() != labels.len() * dim * dim {
            return Err(Error::ShapeMismatch {
                expected: labels.len() * dim * dim,
                found: matrices.len(),
            });
        }
        if matrices.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dependency matrices"));
        }
        let index: BTreeMap<_, _> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        if index.len() != labels.len() {
            return Err(Error::InvalidConfig("duplicate dependency label".into()));
        }
        Ok(DependencyMatrixSet {
            dim,
            labels,
            matrices,
            index,
        })
    }

    pub fn identity(dim: usize, labels: Vec<DirectedLabel>) -> Result<Self> {
        let mut matrices = vec![0.0f32; labels.len() * dim * dim];
        for m in matrices.chunks_exact_mut(dim * dim) {
            for i in 0..dim {
                m[i * dim + i] = 1.0;
            }
        }
        Self::new(dim, labels, matrices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[DirectedLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.matrices
    }

    /// Row-major matrix at position `i` of the label list.
    pub fn matrix_at(&self, i: usize) -> &[f32] {
        let sq = self.dim * self.dim;
        &self.matrices[i * sq..(i + 1) * sq]
    }

    pub fn matrix(&self, label: &DirectedLabel) -> Option<&[f32]> {
        self.index.get(label).map(|&i| self.matrix_at(i))
    }
}

/// Cosine similarity; fails on zero-norm input.
pub fn cosine<A: Scalar, B: Scalar>(u: &[A], v: &[B]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Similarity of `query` to every row; `None` for zero-norm rows.
fn similarities(space: &EmbeddingSpace, query: &[f64]) -> Result<Vec<Option<f64>>> {
    if query.len() != space.dim() {
        return Err(Error::ShapeMismatch {
            expected: space.dim(),
            found: query.len(),
        });
    }
    let qn = norm(query);
    if qn == 0.0 || !qn.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(space
        .rows()
        .map(|row| {
            let rn = norm(row);
            (rn > 0.0).then(|| dot(query, row) / (qn * rn))
        })
        .collect())
}

/// 1 + the number of words strictly closer to `inferred` than `gold_word` is.
pub fn rank_of_gold(space: &EmbeddingSpace, inferred: &[f64], gold_word: &str) -> Result<usize> {
    let gold = space
        .vocab()
        .lookup(gold_word)
        .ok_or_else(|| Error::UnknownWord(gold_word.into()))?;
    let sims = similarities(space, inferred)?;
    let gold_sim = sims[gold as usize].ok_or(Error::ZeroNorm)?;
    let closer = sims
        .iter()
        .enumerate()
        .filter(|&(i, s)| i != gold as usize && matches!(s, Some(s) if *s > gold_sim))
        .count();
    Ok(closer + 1)
}

/// Top `k` words by cosine, descending; ties keep vocabulary order.
pub fn nearest_neighbors<'s>(
    space: &'s EmbeddingSpace,
    query: &[f64],
    k: usize,
) -> Result<Vec<(&'s str, f64)>> {
    let sims = similarities(space, query)?;
    let mut scored: Vec<(u32, f64)> = sims
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i as u32, s)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(id, s)| (space.vocab().word(id), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn space(words: &[&str], rows: &[&[f32]]) -> EmbeddingSpace {
        let vocab = Vocabulary::from_ordered(
            words.iter().map(|w| w.to_string()).collect(),
            alloc::vec![1; words.len()],
            1,
            true,
        )
        .unwrap();
        let dim = rows[0].len();
        EmbeddingSpace::new(vocab, dim, rows.concat()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let u = [1.0f64, 2.0, 3.0];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0f64, 0.0], &[0.0f64, 1.0]).unwrap(), 0.0);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert!((cosine(&u, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0f64, 0.0], &[1.0f64, 0.0]), Err(Error::ZeroNorm));
    }

    #[test]
    fn rank_examples() {
        let s = space(&["a", "b", "c"], &[&[1.0, 0.0], &[0.6, 0.8], &[0.0, 1.0]]);
        assert_eq!(rank_of_gold(&s, &[0.6, 0.8], "b").unwrap(), 1);
        // cosines to [1, 0.2]: a 0.98, b 0.74, c 0.196
        assert_eq!(rank_of_gold(&s, &[1.0, 0.2], "b").unwrap(), 2);
        assert_eq!(rank_of_gold(&s, &[1.0, 0.2], "c").unwrap(), 3);
        assert!(matches!(
            rank_of_gold(&s, &[1.0, 0.0], "zebra"),
            Err(Error::UnknownWord(_))
        ));
    }

    #[test]
    fn ties_do_not_worsen_rank() {
        let s = space(&["a", "b"], &[&[1.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(rank_of_gold(&s, &[1.0, 0.0], "b").unwrap(), 1);
    }

    #[test]
    fn neighbor_examples() {
        let s = space(&["a", "b"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let nn = nearest_neighbors(&s, &[0.0, 1.0], 5).unwrap();
        assert_eq!(nn[0], ("b", 1.0));
        assert_eq!(nn.len(), 2);
        let nn = nearest_neighbors(&s, &[0.9, 0.1], 1).unwrap();
        assert_eq!(nn.len(), 1);
        assert_eq!(nn[0].0, "a");
        assert!(nearest_neighbors(&s, &[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn space_rejects_bad_shapes() {
        let vocab = Vocabulary::from_counts([("a".to_string(), 1)], 1, true);
        assert!(EmbeddingSpace::new(vocab.clone(), 2, alloc::vec![1.0]).is_err());
        assert!(EmbeddingSpace::new(vocab, 1, alloc::vec![f32::NAN]).is_err());
    }
}
