//! Pool-based active learning for multi-label classification.
//!
//! The library simulates the annotate-retrain loop: a linear scorer over
//! spatial feature grids is pooled into per-class scores (top/bottom-instance
//! pooling in the WELDON style, or class-wise plus spatial pooling in the
//! WILDCAT style), query metrics rank the unlabeled pool by informativeness,
//! and selection strategies — single metrics, the metric-agnostic round-robin,
//! voting, adversarial and passive baselines — decide which samples get their
//! labels revealed each iteration.
//!
//! Modules mirror the pipeline:
//!
//! - [`scoremap`]: score-map types and the two spatial pooling schemes with
//!   their subgradients and the per-class foreground-background separation.
//! - [`model`]: the trainable scorer (per-cell linear map + pooling + sigmoid),
//!   BCE training, and mAP evaluation.
//! - [`metrics`]: per-sample informativeness scores (UNC, ENT, MM, SEP*) and
//!   pool rankings.
//! - [`aggregate`]: selection composers — metric-agnostic round-robin, voting,
//!   and the most-classes-first adversarial baseline.
//! - [`data`]: synthetic dataset generation with planted spatial structure,
//!   plus a manifest + binary tensor on-disk format.
//! - [`harness`]: the active-learning loop, trial aggregation, and run records.

pub mod aggregate;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod scoremap;
pub mod seed;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Opaque per-sample identifier. Orderings throughout the crate break ties
/// by ascending `SampleId`, which keeps every selection deterministic.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct SampleId(pub u64);

impl std::fmt::Display for SampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
