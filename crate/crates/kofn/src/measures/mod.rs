//! Ground sets, configurations, the k-out-of-n measure, increasing events,
//! pivotality, and influences.

mod config;
mod events;
mod influence;
mod measure;

pub use config::{Configuration, GroundSet};
pub use events::{
    check_monotone_exhaustive, check_monotone_sampled, event_suite, random_monotone_dnf, Dictator,
    Event, MonotoneDnf, Threshold, Trivial,
};
pub(crate) use influence::indicator_mean_se;
pub use influence::{
    event_probability_exact, influence_exact, influence_mc, influence_vector_exact,
    influence_vector_mc, is_pivotal, is_pivotal_pair, is_zero_pivotal, InfluenceVector,
};
pub use measure::{
    binomial, ConfigurationIter, DisagreementDistribution, KOutOfN, DEFAULT_ENUMERATION_CAP,
};
