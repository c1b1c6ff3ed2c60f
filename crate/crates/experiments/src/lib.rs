//! Seeded Monte Carlo estimators and exact condition checks built on
//! `crossloop-core`: crossing probabilities, the stability gap, the
//! symmetric-difference quantity of the coupled pair `(η, ω)`, and the
//! condition suite, with reproducible CSV and SVG output.
//!
//! Every estimator is a deterministic function of its settings and seed.
//! Replicas run in parallel, but each draws only from its own random
//! streams and the results are summed with a fixed pairwise tree, so the
//! output does not depend on the number of threads.

pub mod conditions;
pub mod crossing;
pub mod csv;
pub mod estimate;
pub mod svg;

pub use conditions::{condition_suite, markov_check, ConditionReport, ConditionSettings, MarkovCase, MarkovReport};
pub use crossing::{
    estimate_crossing_prob, stability_gap, stability_gap_ladder, symdiff_crossing, symdiff_ladder, CrossingModel, Setup,
};
pub use estimate::{replicate, with_threads, Estimate, Ladder, Rung};
