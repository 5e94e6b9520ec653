//! Background-model training: window Skip-Gram, dependency Skip-Gram and the
//! single-embedding Dependency Matrix model, all with negative sampling and
//! mini-batch Adagrad.

mod adagrad;
mod objective;
mod params;
mod sampler;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use rand::Rng;

pub use adagrad::{adagrad_step, AdagradState, ADAGRAD_EPSILON};
pub use objective::{
    dm_score, tuple_loss_and_grads, tuple_loss_and_grads_into, TupleGrads, TupleParams,
};
pub use params::{AtomicF32, ParamTable};
pub use sampler::{sample_negatives, AliasTable};

use crate::corpus::{
    encode, subsample_weight, window_tuples_from_ids, DependencyMode, DependencyVocab,
    EncodedArc, NoiseDistribution, ParsedSentence, TrainingTuple, Vocabulary,
};
use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::spaces::{ContextVectors, DependencyMatrixSet, EmbeddingSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    SkipGram,
    DepSkipGram,
    DepMatrix,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::SkipGram, ModelKind::DepSkipGram, ModelKind::DepMatrix];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::SkipGram => "skipgram",
            ModelKind::DepSkipGram => "dep-skipgram",
            ModelKind::DepMatrix => "dep-matrix",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub model: ModelKind,
    pub dim: usize,
    pub negatives: usize,
    /// Tuples whose gradients are summed before each Adagrad step.
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Window size (window Skip-Gram only).
    pub window: usize,
    pub subsample_tau: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Worker count. The trainer in this crate always runs one worker; the
    /// `depfsl` crate runs several when this is above 1.
    pub threads: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            model: ModelKind::SkipGram,
            dim: 100,
            negatives: 15,
            batch_size: 5,
            learning_rate: 0.025,
            window: 5,
            subsample_tau: 1e-6,
            epochs: 5,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(alloc::string::String::from(what)));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning rate must be positive");
        }
        if !(self.subsample_tau > 0.0) {
            return bad("subsampling threshold must be positive");
        }
        if self.model == ModelKind::SkipGram && self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.threads == 0 {
            return bad("threads must be at least 1");
        }
        Ok(())
    }
}

/// Trainable parameters. In the Dependency Matrix model target and context
/// roles share `words`.
#[derive(Debug)]
pub struct ModelParams {
    pub words: ParamTable,
    pub contexts: Option<ParamTable>,
    pub matrices: Option<ParamTable>,
}

/// Output of training: the published space, plus matrices for `DepMatrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub space: EmbeddingSpace,
    pub matrices: Option<DependencyMatrixSet>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShardStats {
    pub tuples: u64,
    pub loss_sum: f64,
}

impl ShardStats {
    pub fn merge(&mut self, other: ShardStats) {
        self.tuples += other.tuples;
        self.loss_sum += other.loss_sum;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    pub tuples: u64,
    pub mean_loss: f64,
}

impl EpochStats {
    pub fn new(epoch: usize, stats: ShardStats) -> Self {
        let mean_loss = if stats.tuples == 0 {
            0.0
        } else {
            stats.loss_sum / stats.tuples as f64
        };
        EpochStats {
            epoch,
            tuples: stats.tuples,
            mean_loss,
        }
    }
}

#[derive(Debug, Clone)]
struct EncodedSentence {
    ids: Vec<Option<u32>>,
    arcs: Vec<EncodedArc>,
}

const INIT_STREAM: u64 = u64::MAX;

/// Training data for one model, prepared once and shared read-only by workers.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: TrainerConfig,
    vocab: Vocabulary,
    deps: Option<DependencyVocab>,
    sentences: Vec<EncodedSentence>,
    keep: Vec<f64>,
    noise: AliasTable,
    context_rows: usize,
}

impl Trainer {
    pub fn new(corpus: &[ParsedSentence], vocab: Vocabulary, config: TrainerConfig) -> Result<Self> {
        config.validate()?;
        if vocab.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let deps = match config.model {
            ModelKind::SkipGram => None,
            ModelKind::DepSkipGram => Some(DependencyVocab::build(corpus, &vocab, DependencyMode::SkipGram)),
            ModelKind::DepMatrix => Some(DependencyVocab::build(corpus, &vocab, DependencyMode::Matrix)),
        };
        let sentences = corpus
            .iter()
            .map(|s| EncodedSentence {
                ids: encode(s, &vocab),
                arcs: deps
                    .as_ref()
                    .map(|d| d.encode_arcs(s, &vocab))
                    .unwrap_or_default(),
            })
            .collect();
        let keep = (0..vocab.len() as u32)
            .map(|id| subsample_weight(vocab.rel_freq(id), config.subsample_tau))
            .collect::<Result<Vec<_>>>()?;
        let (noise, context_rows) = match deps.as_ref().and_then(|d| d.contexts()) {
            Some(ctx) if ctx.is_empty() => return Err(Error::EmptyVocabulary),
            Some(ctx) => (NoiseDistribution::from_vocab(ctx)?, ctx.len()),
            None => (NoiseDistribution::from_vocab(&vocab)?, vocab.len()),
        };
        Ok(Trainer {
            config,
            vocab,
            deps,
            sentences,
            keep,
            noise: AliasTable::new(&noise),
            context_rows,
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dependency_vocab(&self) -> Option<&DependencyVocab> {
        self.deps.as_ref()
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    /// Vectors uniform in `[-0.5/dim, 0.5/dim]`; matrices identity plus
    /// uniform noise in `[-0.01, 0.01]`.
    pub fn init_params(&self) -> ModelParams {
        let dim = self.config.dim;
        let mut rng = derive_rng(self.config.seed, &[INIT_STREAM]);
        let half = 0.5 / dim as f32;
        let words = ParamTable::uniform(self.vocab.len(), dim, half, &mut rng);
        let contexts = match self.config.model {
            ModelKind::DepMatrix => None,
            _ => Some(ParamTable::uniform(self.context_rows, dim, half, &mut rng)),
        };
        let matrices = self.deps.as_ref().filter(|_| self.config.model == ModelKind::DepMatrix).map(|d| {
            let mut values = Vec::with_capacity(d.labels().len() * dim * dim);
            for _ in d.labels() {
                for i in 0..dim {
                    for j in 0..dim {
                        let noise = (rng.random::<f32>() * 2.0 - 1.0) * 0.01;
                        values.push(if i == j { 1.0 + noise } else { noise });
                    }
                }
            }
            ParamTable::from_values(d.labels().len(), dim * dim, values)
        });
        ModelParams {
            words,
            contexts,
            matrices,
        }
    }

    /// Single-worker training; bit-deterministic for a given corpus and config.
    pub fn train<F: FnMut(&EpochStats)>(&self, mut progress: F) -> Result<TrainedModel> {
        let params = self.init_params();
        for epoch in 0..self.config.epochs {
            let stats = self.run_shard(&params, 0..self.sentences.len(), epoch, 0)?;
            progress(&EpochStats::new(epoch + 1, stats));
        }
        self.publish(&params)
    }

    /// One pass over `range` of the corpus. The random stream depends only on
    /// `(seed, epoch, shard)`.
    pub fn run_shard(
        &self,
        params: &ModelParams,
        range: Range<usize>,
        epoch: usize,
        shard: usize,
    ) -> Result<ShardStats> {
        let mut rng = derive_rng(self.config.seed, &[epoch as u64, shard as u64]);
        let mut worker = Worker::new(self, params);
        let mut tuples = Vec::new();
        let mut kept: Vec<Option<u32>> = Vec::new();
        for sentence in &self.sentences[range] {
            kept.clear();
            kept.extend(sentence.ids.iter().map(|id| {
                id.filter(|&w| {
                    let p = self.keep[w as usize];
                    p >= 1.0 || rng.random::<f64>() < p
                })
            }));
            tuples.clear();
            match self.config.model {
                ModelKind::SkipGram => window_tuples_from_ids(&kept, self.config.window, &mut tuples),
                _ => {
                    for arc in &sentence.arcs {
                        if kept[arc.head_pos as usize].is_some()
                            && kept[arc.dependent_pos as usize].is_some()
                        {
                            tuples.push(arc.forward);
                            tuples.push(arc.backward);
                        }
                    }
                }
            }
            for tuple in &tuples {
                worker.step(tuple, &mut rng)?;
            }
        }
        worker.flush()?;
        Ok(worker.stats)
    }

    pub fn publish(&self, params: &ModelParams) -> Result<TrainedModel> {
        let dim = self.config.dim;
        let mut space = EmbeddingSpace::new(self.vocab.clone(), dim, params.words.to_vec())?;
        if let Some(ctx) = &params.contexts {
            let vocab = match self.deps.as_ref().and_then(|d| d.contexts()) {
                Some(v) => v.clone(),
                None => self.vocab.clone(),
            };
            space = space.with_contexts(ContextVectors {
                vocab,
                vectors: ctx.to_vec(),
            })?;
        }
        let matrices = match (&params.matrices, &self.deps) {
            (Some(m), Some(d)) => Some(DependencyMatrixSet::new(dim, d.labels().to_vec(), m.to_vec())?),
            _ => None,
        };
        Ok(TrainedModel { space, matrices })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Table {
    Words,
    Contexts,
    Matrices,
}

/// Sparse gradient sums for one mini-batch.
#[derive(Debug, Default)]
struct GradBuffer {
    keys: Vec<(Table, u32, usize)>,
    data: Vec<f64>,
}

impl GradBuffer {
    fn add(&mut self, table: Table, row: u32, grad: &[f64]) {
        let offset = match self.keys.iter().find(|(t, r, _)| *t == table && *r == row) {
            Some(&(_, _, offset)) => offset,
            None => {
                let offset = self.data.len();
                self.data.resize(offset + grad.len(), 0.0);
                self.keys.push((table, row, offset));
                offset
            }
        };
        for (d, g) in self.data[offset..offset + grad.len()].iter_mut().zip(grad) {
            *d += g;
        }
    }

    fn clear(&mut self) {
        self.keys.clear();
        self.data.clear();
    }
}

struct Worker<'t> {
    trainer: &'t Trainer,
    params: &'t ModelParams,
    target: Vec<f64>,
    context: Vec<f64>,
    negatives: Vec<f64>,
    negative_ids: Vec<u32>,
    matrix: Vec<f64>,
    grads: TupleGrads,
    buffer: GradBuffer,
    in_batch: usize,
    stats: ShardStats,
}

impl<'t> Worker<'t> {
    fn new(trainer: &'t Trainer, params: &'t ModelParams) -> Self {
        let dim = trainer.config.dim;
        let k = trainer.config.negatives;
        let with_matrix = params.matrices.is_some();
        Worker {
            trainer,
            params,
            target: vec![0.0; dim],
            context: vec![0.0; dim],
            negatives: vec![0.0; dim * k],
            negative_ids: vec![0; k],
            matrix: if with_matrix { vec![0.0; dim * dim] } else { Vec::new() },
            grads: TupleGrads::zeros(dim, k, with_matrix),
            buffer: GradBuffer::default(),
            in_batch: 0,
            stats: ShardStats::default(),
        }
    }

    fn context_table(&self) -> (Table, &'t ParamTable) {
        match &self.params.contexts {
            Some(c) => (Table::Contexts, c),
            None => (Table::Words, &self.params.words),
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, tuple: &TrainingTuple, rng: &mut R) -> Result<()> {
        let dim = self.trainer.config.dim;
        let (ctx_key, ctx_table) = self.context_table();
        self.params.words.read_row(tuple.target as usize, &mut self.target);
        ctx_table.read_row(tuple.context as usize, &mut self.context);
        for (id, row) in self.negative_ids.iter_mut().zip(self.negatives.chunks_exact_mut(dim)) {
            *id = self.trainer.noise.sample(rng);
            ctx_table.read_row(*id as usize, row);
        }
        let matrix_row = match (&self.params.matrices, tuple.relation) {
            (Some(m), Some(rel)) => {
                m.read_row(rel as usize, &mut self.matrix);
                Some(rel)
            }
            _ => None,
        };
        let params = TupleParams {
            target: &self.target,
            context: &self.context,
            negatives: &self.negatives,
            matrix: matrix_row.map(|_| self.matrix.as_slice()),
        };
        tuple_loss_and_grads_into(&params, &mut self.grads)?;
        if !self.grads.loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        self.stats.tuples += 1;
        self.stats.loss_sum += self.grads.loss;

        self.buffer.add(Table::Words, tuple.target, &self.grads.target);
        self.buffer.add(ctx_key, tuple.context, &self.grads.context);
        for (&id, g) in self.negative_ids.iter().zip(self.grads.negatives.chunks_exact(dim)) {
            self.buffer.add(ctx_key, id, g);
        }
        if let (Some(rel), Some(gm)) = (matrix_row, self.grads.matrix.as_deref()) {
            self.buffer.add(Table::Matrices, rel, gm);
        }
        self.in_batch += 1;
        if self.in_batch == self.trainer.config.batch_size {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let lr = self.trainer.config.learning_rate;
        for &(table, row, offset) in &self.buffer.keys {
            let (t, width) = match table {
                Table::Words => (&self.params.words, self.params.words.width()),
                Table::Contexts => {
                    let c = self.params.contexts.as_ref().expect("context table");
                    (c, c.width())
                }
                Table::Matrices => {
                    let m = self.params.matrices.as_ref().expect("matrix table");
                    (m, m.width())
                }
            };
            t.apply_adagrad(row as usize, &self.buffer.data[offset..offset + width], lr)?;
        }
        self.buffer.clear();
        self.in_batch = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use alloc::string::ToString;

    fn toy_corpus() -> Vec<ParsedSentence> {
        let forms = ["the", "dog", "barks", "loudly"];
        (0..50)
            .map(|_| {
                let tokens = vec![
                    Token::new(1, forms[0], 2, "det"),
                    Token::new(2, forms[1], 3, "nsubj"),
                    Token::new(3, forms[2], 0, "root"),
                    Token::new(4, forms[3], 3, "advmod"),
                ];
                ParsedSentence::new(tokens).unwrap()
            })
            .collect()
    }

    fn config(model: ModelKind, epochs: usize) -> TrainerConfig {
        TrainerConfig {
            model,
            dim: 8,
            negatives: 3,
            subsample_tau: 1.0,
            epochs,
            seed: 11,
            ..TrainerConfig::default()
        }
    }

    #[test]
    fn zero_epochs_returns_initial_space() {
        let corpus = toy_corpus();
        let vocab = Vocabulary::build(&corpus, 1, true);
        for model in ModelKind::ALL {
            let trainer = Trainer::new(&corpus, vocab.clone(), config(model, 0)).unwrap();
            let init = trainer.publish(&trainer.init_params()).unwrap();
            let trained = trainer.train(|_| {}).unwrap();
            assert_eq!(init, trained);
            let bound = 0.5 / 8.0;
            assert!(trained.space.targets().iter().all(|x| x.abs() <= bound));
            assert_eq!(trained.matrices.is_some(), model == ModelKind::DepMatrix);
        }
    }

    #[test]
    fn single_worker_is_deterministic() {
        let corpus = toy_corpus();
        let vocab = Vocabulary::build(&corpus, 1, true);
        for model in ModelKind::ALL {
            let trainer = Trainer::new(&corpus, vocab.clone(), config(model, 3)).unwrap();
            let a = trainer.train(|_| {}).unwrap();
            let b = trainer.train(|_| {}).unwrap();
            assert_eq!(a, b);
            let init = trainer.publish(&trainer.init_params()).unwrap();
            assert_ne!(a.space, init.space);
        }
    }

    #[test]
    fn rejects_empty_vocabulary_and_bad_config() {
        let corpus = toy_corpus();
        assert_eq!(
            Trainer::new(&corpus, Vocabulary::default(), config(ModelKind::SkipGram, 1)).unwrap_err(),
            Error::EmptyVocabulary
        );
        let vocab = Vocabulary::build(&corpus, 1, true);
        let bad = TrainerConfig {
            batch_size: 0,
            ..config(ModelKind::SkipGram, 1)
        };
        assert!(Trainer::new(&corpus, vocab, bad).is_err());
    }

    #[test]
    fn divergence_aborts() {
        let corpus = toy_corpus();
        let vocab = Vocabulary::build(&corpus, 1, true);
        let trainer = Trainer::new(&corpus, vocab, config(ModelKind::SkipGram, 1)).unwrap();
        let mut params = trainer.init_params();
        let rows = params.words.rows();
        params.words = ParamTable::from_values(rows, 8, vec![f32::NAN; rows * 8]);
        let err = trainer.run_shard(&params, 0..corpus.len(), 0, 0).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)), "{err:?}");
    }

    #[test]
    fn model_kind_names() {
        for k in ModelKind::ALL {
            assert_eq!(k.to_string().parse::<ModelKind>().unwrap(), k);
        }
        assert!("skipgarm".parse::<ModelKind>().is_err());
    }
}
