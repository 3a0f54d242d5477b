//! Toolkit for per-word homograph disambiguation from contextual embeddings.
//!
//! The crate is organised around the pipeline it supports:
//!
//! * [`dataset`] parses the tab-separated homograph corpus, validates it,
//!   computes descriptive statistics and produces stratified splits.
//! * [`embeddings`] reads and writes `hgd-emb/1` embedding stores, provides
//!   cosine-similarity math and a seeded synthetic store generator.
//! * [`classifiers`] implements KNN, multinomial logistic regression, a ridge
//!   classifier, a sigmoid MLP and a Gini random forest, all from scratch.
//! * [`experiments`] computes macro metrics and runs the model comparison,
//!   embedding comparison and cosine-similarity analyses.
//! * [`cli`] wires everything to the `hgd` command line tool.

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod embeddings;
mod error;
pub mod experiments;
pub mod fixtures;
mod io_util;
mod linalg;

pub use error::{Error, Result};
