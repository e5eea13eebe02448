//! Disagreement matchings between equal-weight strings and the interpolation
//! sequence that rebuilds one string from another along a decision tree's
//! query order, two coordinates at a time.

mod checks;

pub use checks::{
    check_claim_distributional_equality, check_term_identity, check_z_marginal, mc_term_identity,
    search_positive_correlation, ClaimEqualityReport, CorrelationFinding, McTermIdentityReport,
    TermIdentityReport, ZMarginalReport,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{Configuration, Event};
use crate::trees::{run_tree, DecisionTree, TauVariant, Transcript};

/// Splits the points where `x` and `y` differ by type: `(1,0)` points carry a
/// one in `x`, `(0,1)` points a one in `y`. The two sets always have equal
/// size when the weights agree.
pub fn disagreement_points(
    x: &Configuration,
    y: &Configuration,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.ones() != y.ones() {
        return Err(Error::WeightMismatch {
            left: x.ones(),
            right: y.ones(),
        });
    }
    let mut type10 = Vec::new();
    let mut type01 = Vec::new();
    for e in 0..x.len() {
        match (x.get(e), y.get(e)) {
            (true, false) => type10.push(e),
            (false, true) => type01.push(e),
            _ => {}
        }
    }
    debug_assert_eq!(type10.len(), type01.len());
    Ok((type10, type01))
}

/// An involution on the ground set pairing each `(1,0)` disagreement point
/// with a `(0,1)` point, and fixing every agreement point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    map: Vec<usize>,
}

impl Matching {
    fn from_paired_lists(n: usize, type10: &[usize], partner01: &[usize]) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        for (&g, &h) in type10.iter().zip(partner01) {
            map[g] = h;
            map[h] = g;
        }
        Matching { map }
    }

    pub fn apply(&self, e: usize) -> usize {
        self.map[e]
    }

    /// Matched pairs as `(min, max)` tuples, sorted.
    pub fn matched_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .map
            .iter()
            .enumerate()
            .filter(|&(e, &p)| e < p)
            .map(|(e, &p)| (e, p))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn singletons(&self) -> impl Iterator<Item = usize> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter(|&(e, &p)| e == p)
            .map(|(e, _)| e)
    }

    /// Checks the involution and typing conditions against a concrete pair.
    pub fn is_valid_for(&self, x: &Configuration, y: &Configuration) -> bool {
        if self.map.len() != x.len() || x.len() != y.len() || x.ones() != y.ones() {
            return false;
        }
        for e in 0..x.len() {
            let p = self.map[e];
            if p >= self.map.len() || self.map[p] != e {
                return false;
            }
            let disagrees = x.get(e) != y.get(e);
            if disagrees {
                if p == e || x.get(p) == y.get(p) || x.get(p) != y.get(e) {
                    return false;
                }
            } else if p != e {
                return false;
            }
        }
        true
    }
}

/// Draws uniformly among the `(d/2)!` matchings for `(x, y)` by pairing the
/// `(1,0)` list with a uniformly shuffled `(0,1)` list.
pub fn uniform_matching<R: Rng + ?Sized>(
    x: &Configuration,
    y: &Configuration,
    rng: &mut R,
) -> Result<Matching> {
    let (type10, mut type01) = disagreement_points(x, y)?;
    let m = type01.len();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        type01.swap(i, j);
    }
    Ok(Matching::from_paired_lists(x.len(), &type10, &type01))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Every matching for `(x, y)`; the literal support of the uniform matching.
pub fn all_matchings(x: &Configuration, y: &Configuration) -> Result<Vec<Matching>> {
    let (type10, type01) = disagreement_points(x, y)?;
    Ok(permutations(&type01)
        .into_iter()
        .map(|perm| Matching::from_paired_lists(x.len(), &type10, &perm))
        .collect())
}

/// The interpolation from `X` toward `Y` along the tree's query order: at each
/// step `j <= tau` the queried point and its matched partner take `Y`'s
/// values; afterwards the string freezes.
#[derive(Debug, Clone)]
pub struct ZSequence {
    pub states: Vec<Configuration>,
    pub tau: usize,
    pub transcript: Transcript,
}

impl ZSequence {
    pub fn final_state(&self) -> &Configuration {
        self.states.last().expect("states nonempty")
    }
}

pub fn build_z_sequence(
    x: &Configuration,
    y: &Configuration,
    matching: &Matching,
    tree: &dyn DecisionTree,
    event: &dyn Event,
    variant: TauVariant,
) -> Result<ZSequence> {
    if !matching.is_valid_for(x, y) {
        return Err(Error::InvalidParameter(
            "matching is not valid for the given pair".into(),
        ));
    }
    let transcript = run_tree(tree, event, x, variant)?;
    let n = x.len();
    let mut states = Vec::with_capacity(n + 1);
    states.push(x.clone());
    for j in 1..=n {
        let prev = states.last().expect("nonempty");
        if j <= transcript.tau {
            let e = transcript.order[j - 1];
            let partner = matching.apply(e);
            let mut z = prev.clone();
            z.set(e, y.get(e));
            z.set(partner, y.get(partner));
            states.push(z);
        } else {
            states.push(prev.clone());
        }
    }
    Ok(ZSequence {
        states,
        tau: transcript.tau,
        transcript,
    })
}

/// Builds only the final string `Z^(n) = Z^(tau)`, for Monte Carlo loops.
pub fn z_final(
    x: &Configuration,
    y: &Configuration,
    matching: &Matching,
    transcript: &Transcript,
) -> Configuration {
    let mut z = x.clone();
    for j in 0..transcript.tau {
        let e = transcript.order[j];
        let partner = matching.apply(e);
        z.set(e, y.get(e));
        z.set(partner, y.get(partner));
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Dictator, KOutOfN};
    use crate::trees::FixedOrderTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disagreement_examples() {
        let x = Configuration::from_bitstring("1100").unwrap();
        assert_eq!(disagreement_points(&x, &x).unwrap(), (vec![], vec![]));

        let a = Configuration::from_bitstring("10").unwrap();
        let b = Configuration::from_bitstring("01").unwrap();
        assert_eq!(disagreement_points(&a, &b).unwrap(), (vec![0], vec![1]));

        let c = Configuration::from_bitstring("0011").unwrap();
        assert_eq!(
            disagreement_points(&x, &c).unwrap(),
            (vec![0, 1], vec![2, 3])
        );

        let bad = Configuration::from_bitstring("1110").unwrap();
        assert!(matches!(
            disagreement_points(&x, &bad),
            Err(Error::WeightMismatch { .. })
        ));
    }

    #[test]
    fn matching_enumeration_counts_factorials() {
        let x = Configuration::from_bitstring("1100").unwrap();
        let y = Configuration::from_bitstring("0011").unwrap();
        let all = all_matchings(&x, &y).unwrap();
        assert_eq!(all.len(), 2);
        for m in &all {
            assert!(m.is_valid_for(&x, &y));
        }
        // d = 0 gives the identity.
        let id = all_matchings(&x, &x).unwrap();
        assert_eq!(id.len(), 1);
        assert!(id[0].matched_pairs().is_empty());
    }

    #[test]
    fn uniform_matching_is_uniform_over_both_choices() {
        let x = Configuration::from_bitstring("1100").unwrap();
        let y = Configuration::from_bitstring("0011").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut counts = std::collections::HashMap::new();
        let trials = 100_000u32;
        for _ in 0..trials {
            let m = uniform_matching(&x, &y, &mut rng).unwrap();
            *counts.entry(m.matched_pairs()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 2);
        for (_, c) in counts {
            let p = f64::from(c) / f64::from(trials);
            // 3 sigma of a fair coin over 1e5 trials.
            assert!((p - 0.5).abs() < 3.0 * (0.25f64 / f64::from(trials)).sqrt() + 1e-12);
        }
    }

    #[test]
    fn z_sequence_single_swap_reaches_y() {
        let x = Configuration::from_bitstring("10").unwrap();
        let y = Configuration::from_bitstring("01").unwrap();
        let m = all_matchings(&x, &y).unwrap().remove(0);
        let tree = FixedOrderTree::new(vec![0, 1]).unwrap();
        let a = Dictator::new(2, 0).unwrap();
        let z = build_z_sequence(&x, &y, &m, &tree, &a, TauVariant::Standard).unwrap();
        assert_eq!(z.tau, 1);
        assert_eq!(z.states[0], x);
        assert_eq!(z.states[1], y);
        assert_eq!(z.states[2], y);
    }

    #[test]
    fn z_sequence_trivial_when_x_equals_y() {
        let x = Configuration::from_bitstring("0110").unwrap();
        let m = all_matchings(&x, &x).unwrap().remove(0);
        let tree = FixedOrderTree::new(vec![3, 2, 1, 0]).unwrap();
        let a = Dictator::new(4, 1).unwrap();
        let z = build_z_sequence(&x, &x, &m, &tree, &a, TauVariant::Standard).unwrap();
        for s in &z.states {
            assert_eq!(s, &x);
        }
    }

    #[test]
    fn z_states_keep_weight_and_satisfy_the_coordinate_identity() {
        // For j <= tau: Z^(j) equals Y on queried points and their partners,
        // and equals X elsewhere; checked by direct recomputation.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [4usize, 6, 8, 10, 12] {
            let k = n / 2;
            let measure = KOutOfN::new(n, k).unwrap();
            let event = crate::measures::random_monotone_dnf(n, &mut rng);
            let tree = crate::trees::random_order_tree(n, &mut rng);
            for _ in 0..2_000 {
                let x = measure.sample(&mut rng);
                let y = measure.sample(&mut rng);
                let m = uniform_matching(&x, &y, &mut rng).unwrap();
                let z = build_z_sequence(&x, &y, &m, &tree, &event, TauVariant::Standard).unwrap();
                for (j, state) in z.states.iter().enumerate() {
                    assert_eq!(state.ones(), k);
                    let jj = j.min(z.tau);
                    let mut touched = vec![false; n];
                    for &e in &z.transcript.order[..jj] {
                        touched[e] = true;
                        touched[m.apply(e)] = true;
                    }
                    for e in 0..n {
                        let want = if touched[e] { y.get(e) } else { x.get(e) };
                        assert_eq!(state.get(e), want, "n={n} j={j} e={e}");
                    }
                }
                assert_eq!(
                    z.final_state(),
                    &z_final(&x, &y, &m, &z.transcript),
                    "fast path agrees"
                );
            }
        }
    }
}
