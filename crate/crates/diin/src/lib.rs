//! Densely interactive inference network (DIIN) for sentence-pair
//! classification at desk scale.
//!
//! The crate is organized around five stages: a per-token feature pipeline
//! (word vectors, character convolution, part-of-speech one-hots, exact-match
//! bits), a gated encoding layer (highway stack, self-attention, fuse gate),
//! a dense word-by-word interaction tensor, a DenseNet-style convolutional
//! feature extractor, and a linear classifier. Everything runs on a small
//! reverse-mode autodiff tape with a built-in finite-difference oracle, so
//! every layer and schedule is checkable end to end on a laptop CPU.
//!
//! Start with the runnable examples (`cargo run --example gradient_check`,
//! `train_toy`, `ablation_matrix`, `count_params`, `export_heatmap`,
//! `featurize`) or the `diin` binary for the same capabilities behind a CLI.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod params;
pub mod tensor;
pub mod train;

pub use config::{AblationRow, ModelConfig};
pub use error::{Error, Result};
pub use params::{InitSpec, ParamStore};
pub use tensor::{NodeId, Real, Tape};
