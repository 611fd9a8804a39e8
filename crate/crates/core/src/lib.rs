//! Verification of probability forecasts for binary events.
//!
//! The crate scores forecast/outcome pairs with proper scoring rules
//! ([`scoring`]), recalibrates forecasts by isotonic regression
//! ([`recalibration`]), splits mean scores into miscalibration,
//! discrimination and uncertainty ([`decomposition`]), computes
//! threshold-sweep diagnostics such as Murphy, ROC and performance curves
//! ([`diagnostics`]) and quantifies uncertainty with a circular block
//! bootstrap and a Diebold–Mariano test ([`inference`]).

pub mod cli;
pub mod dataset;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod inference;
pub mod recalibration;
pub mod scoring;
pub mod synthetic;

pub use dataset::{align_missing, base_rate, flatten_pairs, load_long_csv, GridField, PairSet, ValueKind};
pub use decomposition::{best_constant, corp_decompose, Decomposition};
pub use error::{Error, Result};
pub use recalibration::{apply_fit, pav_fit, recalibrate, IsotonicFit};
pub use scoring::{FirmSpec, ScoringRule};
