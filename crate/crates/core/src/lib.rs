//! Market regime detection: an unsupervised-then-supervised pipeline over
//! panels of economic time series, plus regime-conditioned backtesting.
//!
//! The flow is load -> impute -> split -> standardize -> PCA -> k-means ->
//! per-model classification -> signal construction -> strategy backtests.
//! Everything is deterministic given a seed; all randomness flows through
//! ChaCha8 generators seeded explicitly.

pub mod backtest;
pub mod classify;
pub mod cluster;
pub mod error;
pub mod panel;
pub mod pca;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
