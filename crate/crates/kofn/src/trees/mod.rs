//! Decision trees, execution transcripts, the stopping time, and revealments.

mod builtins;
mod revealment;
mod run;

pub use builtins::{random_order_tree, tree_suite, FixedOrderTree, HashSplitTree};
pub use revealment::{revealments_exact, revealments_mc, ExactRevealments, McRevealments};
pub use run::{run_tree, tau_certificate_check, Transcript};

/// Which configurations the stopping time quantifies over: all of `{0,1}^E`,
/// or only those with the weight of the input string. Both are valid readings
/// and are never mixed silently; `Standard` is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauVariant {
    #[default]
    Standard,
    FixedWeight,
}

impl std::str::FromStr for TauVariant {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(TauVariant::Standard),
            "fixed-weight" => Ok(TauVariant::FixedWeight),
            other => Err(crate::error::Error::InvalidParameter(format!(
                "unknown stopping-time variant {other:?}; use standard or fixed-weight"
            ))),
        }
    }
}

/// An adaptive query order: a first element plus a successor rule from the
/// revealed history to the next unrevealed element.
pub trait DecisionTree: Send + Sync {
    /// Ground set size the tree queries over.
    fn n(&self) -> usize;

    /// The element examined first.
    fn first(&self) -> usize;

    /// Next element to examine given the ordered revealed history. Must return
    /// an element not present in `history`; the runner enforces this.
    fn next(&self, history: &[(usize, bool)]) -> usize;

    fn name(&self) -> String;
}

impl<T: DecisionTree + ?Sized> DecisionTree for &T {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn first(&self) -> usize {
        (**self).first()
    }

    fn next(&self, history: &[(usize, bool)]) -> usize {
        (**self).next(history)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}
