//! Per-attribute, per-class distribution summaries.

mod gaussian;
mod histogram;
mod quantile;

pub use gaussian::{erf, GaussianStat};
pub use histogram::Histogram;
pub use quantile::{alpha_grid, QuantileSet};
