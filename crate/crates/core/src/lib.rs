//! Dependency-aware distributional semantics without the standard library.
//!
//! This crate holds the numeric and graph machinery:
//!
//! - [`corpus`]: sentences, vocabularies, sampling weights and training-tuple extraction.
//! - [`spaces`]: embedding spaces, dependency matrices and similarity queries.
//! - [`training`]: negative-sampling objectives, Adagrad and the background-model trainer.
//! - [`fewshot`]: Additive, Dependency Additive and Dependency-Matrix Additive inference.
//! - [`eval`]: rank statistics and the Definitional Nonce, Chimera and CRW protocols.
//!
//! File formats, threads and the command line live in the `depfsl` crate.
#![no_std]

extern crate alloc;

pub mod corpus;
pub mod error;
pub mod eval;
pub mod fewshot;
pub mod linalg;
pub mod rng;
pub mod spaces;
pub mod stopwords;
pub mod training;

pub use corpus::{
    DirectedLabel, NoiseDistribution, ParsedSentence, Token, TrainingTuple, Vocabulary,
};
pub use error::{Error, Result};
pub use fewshot::{FewShotContext, FslConfig, Inferencer, Method};
pub use spaces::{DependencyMatrixSet, EmbeddingSpace};
pub use training::{ModelKind, TrainerConfig};
