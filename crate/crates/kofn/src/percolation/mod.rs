//! Site percolation on an R x R triangular-lattice box with a fixed number of
//! occupied vertices: crossing events, exploration-path decision trees,
//! pivotal counting, the density-increment identity, and the scaling
//! experiments built on them.

pub mod crossing;
mod experiments;
mod explore;
mod lattice;

pub use crossing::{
    count_zero_pivotal, count_zero_pivotal_by_flips, crossing_probability_exact, four_arm_witness,
    has_horizontal_crossing, has_vertical_vacant_crossing, russo_check, CrossingEvent,
    PivotalScratch, RussoReport,
};
pub use experiments::{
    crossing_probability_mc, discrete_derivative, discrete_derivative_direct,
    expected_zero_pivotal, one_arm_estimate, osss_averaged_bound_check, pivotal_scaling_experiment,
    revealment_profile, revealment_profile_with_step, AnchorCheck, AveragedOsssReport,
    DiscreteDerivativeReport, McEstimate, OneArmReport, PivotalScalingReport, PivotalScalingRow,
    RevealmentProfile,
};
pub use explore::{ExplorationRun, ExplorationTree, RevealRecorder};
pub use lattice::{TriangularBox, NEIGHBOR_OFFSETS};
