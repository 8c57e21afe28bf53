//! Streaming decision-tree learning with quantile sketches.
//!
//! The crate is organised bottom-up:
//!
//! - [`data`] holds the dataset schema, samples, CSV ingestion and
//!   normalization; [`fixed`] emulates the Q2.30 fixed-point datapath.
//! - [`sketch`] contains the per-attribute-per-class distribution summaries
//!   (signum quantile set, incremental Gaussian, categorical histogram).
//! - [`element`] is the bounded pool of training-state slots bound to leaves.
//! - [`split`] scores candidate splits and applies the Hoeffding test.
//! - [`tree`] is the online tree itself and [`eval`] the interleaved
//!   test-then-train harness plus synthetic stream generators.
//! - [`cost`] and [`power`] are the analytical hardware cost models and the
//!   power-model generation flow.

pub mod cost;
pub mod data;
pub mod element;
pub mod error;
pub mod eval;
pub mod fixed;
pub mod power;
pub mod sketch;
pub mod split;
pub mod synth;
pub mod tree;

pub use data::{AttributeKind, AttributeSchema, DatasetSchema, Sample};
pub use error::{Error, Result};
pub use split::HyperParams;
pub use tree::{HoeffdingTree, ObserverMode};
