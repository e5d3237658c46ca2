//! Recovery of hidden orthogonal product structure in sample distributions.
//!
//! Many distributions factor as a product of two independent pieces living on
//! orthogonal subspaces that are not axis aligned. After whitening, every
//! direction looks the same up to second order, but higher moments still
//! betray the split: polynomial functionals of the form E[(x . u)^m], with
//! the rotation-invariant part subtracted, vanish exactly when u straddles
//! the two subspaces generically and are nonzero along hidden directions.
//! This crate recovers the split from samples by hill climbing such
//! functionals on the unit sphere, certifies candidate splits by comparing
//! joint moments against product reassemblies, and learns low-dimensional
//! concepts supported on the recovered subspace.
//!
//! Module map:
//! - [`dataset`]: sample matrices, whitening, synthetic generators with
//!   ground truth, file formats.
//! - [`moments`]: moment functionals and their derivatives, curvature and
//!   magnitude estimates, product-defect scores.
//! - [`polytest`]: randomized nonzeroness testing for moment functionals.
//! - [`localopt`]: sphere-constrained ascent with first and second order
//!   moves and certified termination.
//! - [`basis`]: iterative recovery of an orthonormal basis for the hidden
//!   subspace, and its extension relative to known directions.
//! - [`factor`]: end-to-end factorization pipelines and candidate ranking.
//! - [`learner`]: subspace concept learning on recovered coordinates.
//! - [`report`]: serializable run reports for the command line tools.

pub mod basis;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod factor;
pub mod learner;
pub mod linalg;
pub mod localopt;
pub mod moments;
pub mod polytest;
pub mod report;
pub mod rng;
pub mod suites;

pub use error::{Error, Result};
