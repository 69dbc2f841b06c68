//! Detection and localisation of mean change points in high-dimensional time
//! series whose coordinates are correlated and whose observations are
//! temporally dependent up to a lag `M`.
//!
//! The pipeline: build a [`GramSummary`] from a [`SeriesMatrix`], compute the
//! bias-corrected trace `L_t` ([`engine::l_trace`]), calibrate it with a
//! U-statistic variance estimate, then test ([`inference::test_global`]),
//! locate ([`inference::estimate_single`]) or segment
//! ([`inference::binary_segmentation`]). [`dependence`] picks `M` from the
//! data; [`sim`] generates synthetic linear processes and runs Monte Carlo
//! experiments.

pub mod dependence;
pub mod engine;
pub mod error;
pub mod gram;
pub mod inference;
pub mod model;
pub mod numeric;
pub mod sim;

pub use error::{Error, Result};
pub use gram::{compute_gram, GramSummary};
pub use model::{
    validate_input, ChangePointSet, DependenceWindow, Segment, SegmentRecord, SegmentStatus, SeriesMatrix,
    TestOutcome,
};
