//! File formats, dataset loading, multi-threaded training and the `depfsl`
//! command-line tool, on top of [`depfsl_core`].

pub mod cli;
pub mod config;
pub mod conllu;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod formats;
pub mod model;
pub mod parallel;
pub mod report;
pub mod stopwords;
pub mod synthetic;

pub use depfsl_core as core;
pub use error::{Error, Result};
