//! Temporal-relational classification toolkit.
//!
//! Builds kernel-weighted, granularity-restricted summaries of time-varying
//! attributed graphs, learns weighted relational Bayes and probability-tree
//! classifiers on them, composes temporal ensembles and computes temporal
//! mining statistics.

pub mod classifier;
pub mod ensembles;
pub mod error;
pub mod evaluation;
pub mod format;
pub mod graph;
pub mod io;
pub mod mining;
pub mod model;
pub mod rbc;
pub mod representation;
pub mod rpt;
pub mod seeding;
pub mod synth;

pub use error::{Error, Result};
