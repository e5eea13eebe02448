//! Exact and Monte Carlo machinery for k-out-of-n measures: decision trees
//! and revealments, influence/pivotality computations, OSSS-type inequality
//! reports, disagreement couplings, sequential uniform encodings, and a
//! fixed-density site-percolation testbed on the triangular lattice.
//!
//! Everything exact runs on arbitrary-precision rationals; floats appear only
//! in Monte Carlo estimates, which always carry standard errors. Samplers take
//! explicit RNGs, and the parallel drivers split deterministic per-worker
//! streams from a root seed.

pub mod coupling;
pub mod encoding;
pub mod error;
pub mod measures;
pub mod osss;
pub mod percolation;
pub mod report;
pub mod rngstream;
pub mod stats;
pub mod trees;
pub mod unionfind;

pub use error::{Error, Result};
pub use measures::{Configuration, Event, GroundSet, KOutOfN};
pub use trees::{DecisionTree, TauVariant};
