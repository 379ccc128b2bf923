//! Spectral laboratory for random regular graphs: labeled multigraphs and
//! their random models, exact non-backtracking trace counts, variable-length
//! graph spectra, tangles, exact walk probabilities and Monte Carlo campaigns.

pub mod embed;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod models;
pub mod nonbacktracking;
pub mod par;
pub mod perron;
pub mod selective;
pub mod spectrum;
pub mod tangle;
pub mod walks;
pub mod trace;
pub mod vlg;

pub use error::{Error, Result};
pub use graph::{EdgePair, Label, LabeledGraph, LoopKind, ModelTag};
pub use models::ModelId;
