//! Topological descriptors for surface micro-geometry.
//!
//! This crate classifies engraved versus natural regions of a 3D surface
//! (given as a depth map) by computing persistent homology of cubical
//! sublevel-set filtrations over sliding patches, summarizing the resulting
//! persistence diagrams as fixed-length feature vectors (interval statistics
//! and persistence images), and training a boosted-tree classifier on them.
//!
//! The main pipeline stages, in dependency order:
//!
//! 1. [`ingest`] — depth-map / label-mask loading and patch extraction.
//! 2. [`cubical`] — cubical filtration construction on the doubled grid.
//! 3. [`persistence`] — persistence-diagram computation (matrix reduction).
//! 4. [`descriptors`] — interval statistics and persistence images.
//! 5. [`clbp`] — completed local binary pattern maps as alternative inputs.
//! 6. [`rusboost`] — boosted decision trees with minority-preserving
//!    undersampling, plus impurity-based feature importances.
//! 7. [`eval`] — overlap scoring, repeated experiments, significance tests.
//! 8. [`synth`] — seeded synthetic benchmark surfaces with ground truth.
//!
//! [`pipeline`] ties stages 1–5 into batch feature extraction and
//! [`render`] produces diagnostic images. The `surftopo` binary exposes all
//! of it on the command line.

pub mod clbp;
pub mod cubical;
pub mod descriptors;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod persistence;
pub mod pipeline;
pub mod render;
pub mod rusboost;
pub mod synth;
mod union_find;
pub mod wilcoxon;

pub use error::{Error, Result};
