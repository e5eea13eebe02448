use std::collections::HashMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::coupling::{all_matchings, uniform_matching, z_final};
use crate::error::{Error, Result};
use crate::measures::{binomial, event_probability_exact, Configuration, Event, KOutOfN};
use crate::report::ExactRatio;
use crate::trees::{run_tree, DecisionTree, TauVariant};

/// Weighted-term budget for the matching-summed exact checks.
const EXACT_CHECK_BUDGET: u64 = 5_000_000;

fn factorial(m: u64) -> BigInt {
    (1..=m)
        .map(BigInt::from)
        .product::<BigInt>()
        .max(BigInt::one())
}

fn check_budget(measure: &KOutOfN) -> Result<()> {
    let n = measure.n() as u64;
    let k = measure.k() as u64;
    let pairs = binomial(n, k).pow(2);
    let worst_matchings = factorial(k.min(n - k));
    let budget = BigInt::from(pairs) * worst_matchings;
    if budget > BigInt::from(EXACT_CHECK_BUDGET) {
        return Err(Error::EnumerationCap {
            n: measure.n(),
            k: measure.k(),
            count: budget.to_string(),
            cap: EXACT_CHECK_BUDGET,
        });
    }
    Ok(())
}

/// Walks every `(X, Y, matching)` triple with its exact weight.
fn for_each_weighted_instance<F>(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    variant: TauVariant,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(
        &Configuration,
        &Configuration,
        &crate::coupling::Matching,
        &crate::trees::Transcript,
        &BigRational,
    ) -> Result<()>,
{
    let support: Vec<Configuration> = measure.enumerate()?.collect();
    let pair_weight = BigRational::new(BigInt::one(), BigInt::from(measure.support_size().pow(2)));
    for x in &support {
        let transcript = run_tree(tree, event, x, variant)?;
        for y in &support {
            let matchings = all_matchings(x, y)?;
            let w = &pair_weight / BigRational::from(BigInt::from(matchings.len() as u64));
            for m in &matchings {
                visit(x, y, m, &transcript, &w)?;
            }
        }
    }
    Ok(())
}

/// Exact joint law of `(1_A(X), Z^(n))`: the final string must be distributed
/// as the measure itself and be independent of the decision on `X`.
#[derive(Debug, Clone, Serialize)]
pub struct ZMarginalReport {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub tree: String,
    pub support: usize,
    pub p_event: ExactRatio,
    pub marginal_uniform: bool,
    pub independent: bool,
    pub pass: bool,
}

pub fn check_z_marginal(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    variant: TauVariant,
) -> Result<ZMarginalReport> {
    check_budget(measure)?;
    let mut joint: HashMap<(bool, Configuration), BigRational> = HashMap::new();
    for_each_weighted_instance(event, tree, measure, variant, |x, y, m, transcript, w| {
        let z = z_final(x, y, m, transcript);
        let key = (event.contains(x), z);
        *joint.entry(key).or_insert_with(BigRational::zero) += w;
        Ok(())
    })?;

    let support_size = measure.support_size().to_usize().expect("under cap");
    let uniform_mass = BigRational::new(BigInt::one(), BigInt::from(measure.support_size()));

    let mut marginal_z: HashMap<Configuration, BigRational> = HashMap::new();
    let mut p_true = BigRational::zero();
    for ((a, z), w) in &joint {
        *marginal_z
            .entry(z.clone())
            .or_insert_with(BigRational::zero) += w;
        if *a {
            p_true += w;
        }
    }
    let marginal_uniform =
        marginal_z.len() == support_size && marginal_z.values().all(|m| m == &uniform_mass);

    let p_false = BigRational::one() - &p_true;
    let mut independent = true;
    for (z, mz) in &marginal_z {
        for (a, pa) in [(true, &p_true), (false, &p_false)] {
            let joint_mass = joint
                .get(&(a, z.clone()))
                .cloned()
                .unwrap_or_else(BigRational::zero);
            if joint_mass != pa * mz {
                independent = false;
            }
        }
    }

    let p_event = event_probability_exact(event, measure)?;
    debug_assert_eq!(p_event, p_true);
    Ok(ZMarginalReport {
        n: measure.n(),
        k: measure.k(),
        event: event.name(),
        tree: tree.name(),
        support: support_size,
        p_event: ExactRatio::from(&p_event),
        marginal_uniform,
        independent,
        pass: marginal_uniform && independent,
    })
}

/// Exact decomposition check: `2 P(A)(1 - P(A))` must equal the probability
/// that exactly one of `X` and `Z^(n)` lies in `A`, split into the small- and
/// large-disagreement parts at threshold `c1 * n`.
#[derive(Debug, Clone, Serialize)]
pub struct TermIdentityReport {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub tree: String,
    pub c1: ExactRatio,
    pub lhs: ExactRatio,
    pub term_small: ExactRatio,
    pub term_large: ExactRatio,
    pub pass: bool,
}

pub fn check_term_identity(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    variant: TauVariant,
    c1: &BigRational,
) -> Result<TermIdentityReport> {
    check_budget(measure)?;
    let threshold = c1 * BigRational::from(BigInt::from(measure.n() as u64));
    let mut term_small = BigRational::zero();
    let mut term_large = BigRational::zero();
    for_each_weighted_instance(event, tree, measure, variant, |x, y, m, transcript, w| {
        let z = z_final(x, y, m, transcript);
        if event.contains(x) != event.contains(&z) {
            let d = x.iter().zip(y.iter()).filter(|(a, b)| a != b).count();
            if BigRational::from(BigInt::from(d as u64)) < threshold {
                term_small += w;
            } else {
                term_large += w;
            }
        }
        Ok(())
    })?;
    let p = event_probability_exact(event, measure)?;
    let lhs = BigRational::from(BigInt::from(2u32)) * &p * (BigRational::one() - &p);
    let pass = lhs == &term_small + &term_large;
    Ok(TermIdentityReport {
        n: measure.n(),
        k: measure.k(),
        event: event.name(),
        tree: tree.name(),
        c1: ExactRatio::from(c1),
        lhs: ExactRatio::from(&lhs),
        term_small: ExactRatio::from(&term_small),
        term_large: ExactRatio::from(&term_large),
        pass,
    })
}

/// Monte Carlo counterpart of [`check_term_identity`] for sizes beyond exact
/// matching enumeration; the left side stays exact.
#[derive(Debug, Clone, Serialize)]
pub struct McTermIdentityReport {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub tree: String,
    pub samples: u64,
    pub lhs_exact: f64,
    pub rhs_estimate: f64,
    pub rhs_se: f64,
    pub sigmas: f64,
    pub pass: bool,
}

pub fn mc_term_identity<R: Rng + ?Sized>(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    variant: TauVariant,
    samples: u64,
    rng: &mut R,
) -> Result<McTermIdentityReport> {
    let p = event_probability_exact(event, measure)?;
    let lhs = BigRational::from(BigInt::from(2u32)) * &p * (BigRational::one() - &p);
    let lhs_exact = lhs.to_f64().expect("small rational");
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = measure.sample(rng);
        let y = measure.sample(rng);
        let m = uniform_matching(&x, &y, rng)?;
        let transcript = run_tree(tree, event, &x, variant)?;
        let z = z_final(&x, &y, &m, &transcript);
        if event.contains(&x) != event.contains(&z) {
            hits += 1;
        }
    }
    let (rhs_estimate, rhs_se) = crate::measures::indicator_mean_se(hits, samples);
    let sigmas = (rhs_estimate - lhs_exact).abs() / rhs_se.max(1e-12);
    Ok(McTermIdentityReport {
        n: measure.n(),
        k: measure.k(),
        event: event.name(),
        tree: tree.name(),
        samples,
        lhs_exact,
        rhs_estimate,
        rhs_se,
        sigmas,
        pass: sigmas <= 4.0,
    })
}

/// Conditional-law equality check: given the revealed prefix at a step
/// `t <= tau`, the set of matched pairs, and the singleton values outside the
/// prefix, the conditional distributions of `Z^(t)` and `Y` must coincide
/// exactly, cell by cell.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimEqualityReport {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub event: String,
    pub tree: String,
    pub cells: usize,
    pub pass: bool,
}

type Cell = (Vec<(usize, bool)>, Vec<(usize, usize)>, Vec<(usize, bool)>);

pub fn check_claim_distributional_equality(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    variant: TauVariant,
    t: usize,
) -> Result<ClaimEqualityReport> {
    check_budget(measure)?;
    if t == 0 || t > measure.n() {
        return Err(Error::InvalidParameter(format!(
            "conditioning step t = {t} out of range"
        )));
    }
    type Law = HashMap<Configuration, BigRational>;
    let mut cells: HashMap<Cell, (Law, Law)> = HashMap::new();
    for_each_weighted_instance(event, tree, measure, variant, |x, y, m, transcript, w| {
        if transcript.tau < t {
            return Ok(());
        }
        let prefix: Vec<(usize, bool)> = transcript.order[..t]
            .iter()
            .map(|&e| (e, x.get(e)))
            .collect();
        let queried: Vec<usize> = transcript.order[..t].to_vec();
        let singleton_values: Vec<(usize, bool)> = m
            .singletons()
            .filter(|s| !queried.contains(s))
            .map(|s| (s, x.get(s)))
            .collect();
        let key: Cell = (prefix, m.matched_pairs(), singleton_values);

        let mut z_t = x.clone();
        for &e in &queried {
            z_t.set(e, y.get(e));
            let partner = m.apply(e);
            z_t.set(partner, y.get(partner));
        }
        let entry = cells.entry(key).or_default();
        *entry.0.entry(z_t).or_insert_with(BigRational::zero) += w;
        *entry.1.entry(y.clone()).or_insert_with(BigRational::zero) += w;
        Ok(())
    })?;

    // Same instances feed both laws, so equal unnormalized maps certify equal
    // conditional distributions.
    let pass = cells.values().all(|(law_z, law_y)| law_z == law_y);
    Ok(ClaimEqualityReport {
        n: measure.n(),
        k: measure.k(),
        t,
        event: event.name(),
        tree: tree.name(),
        cells: cells.len(),
        pass,
    })
}

/// One case where `!(X, Y, A)` and a small-disagreement event are positively
/// correlated, found by exact enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationFinding {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub c1: ExactRatio,
    pub covariance: ExactRatio,
}

/// Searches small instances for positive correlation between the
/// exactly-one-of event and `{d(X, Y) < c1 n}`; a nonempty result refutes
/// negative correlation in general.
pub fn search_positive_correlation(
    events: &[Arc<dyn Event>],
    measure: &KOutOfN,
    c1_grid: &[BigRational],
) -> Result<Vec<CorrelationFinding>> {
    let support: Vec<Configuration> = measure.enumerate()?.collect();
    let total = BigRational::from(BigInt::from((support.len() * support.len()) as u64));
    let n_big = BigRational::from(BigInt::from(measure.n() as u64));
    let mut findings = Vec::new();
    for event in events {
        for c1 in c1_grid {
            let threshold = c1 * &n_big;
            let mut both = BigRational::zero();
            let mut one = BigRational::zero();
            let mut small = BigRational::zero();
            for x in &support {
                for y in &support {
                    let exactly_one = event.contains(x) != event.contains(y);
                    let d = x.iter().zip(y.iter()).filter(|(a, b)| a != b).count();
                    let is_small = BigRational::from(BigInt::from(d as u64)) < threshold;
                    let w = BigRational::one() / &total;
                    if exactly_one {
                        one += &w;
                    }
                    if is_small {
                        small += &w;
                    }
                    if exactly_one && is_small {
                        both += &w;
                    }
                }
            }
            let covariance = &both - &one * &small;
            if covariance > BigRational::zero() {
                findings.push(CorrelationFinding {
                    n: measure.n(),
                    k: measure.k(),
                    event: event.name(),
                    c1: ExactRatio::from(c1),
                    covariance: ExactRatio::from(&covariance),
                });
            }
        }
    }
    Ok(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{event_suite, Dictator, Threshold};
    use crate::trees::{random_order_tree, FixedOrderTree, HashSplitTree};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn z_marginal_equals_measure_on_tiny_cases() {
        let m = KOutOfN::new(2, 1).unwrap();
        let a = Dictator::new(2, 0).unwrap();
        let t = FixedOrderTree::new(vec![0, 1]).unwrap();
        let report = check_z_marginal(&a, &t, &m, TauVariant::Standard).unwrap();
        assert!(report.pass, "{report:?}");

        let m42 = KOutOfN::new(4, 2).unwrap();
        let a42 = Threshold::new(4, vec![0, 1, 2], 2).unwrap();
        let t42 = FixedOrderTree::new(vec![0, 1, 2, 3]).unwrap();
        let r42 = check_z_marginal(&a42, &t42, &m42, TauVariant::Standard).unwrap();
        assert!(r42.pass, "{r42:?}");
        assert_eq!(r42.p_event, ExactRatio::from(&ratio(1, 2)));

        let m63 = KOutOfN::new(6, 3).unwrap();
        let a63 = Dictator::new(6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t63 = random_order_tree(6, &mut rng);
        let r63 = check_z_marginal(&a63, &t63, &m63, TauVariant::Standard).unwrap();
        assert!(r63.pass, "{r63:?}");
    }

    #[test]
    fn term_identity_examples() {
        // Dictator at n=4, k=2: both sides are exactly 1/2.
        let m = KOutOfN::new(4, 2).unwrap();
        let a = Dictator::new(4, 0).unwrap();
        let t = FixedOrderTree::new(vec![0, 1, 2, 3]).unwrap();
        let r = check_term_identity(&a, &t, &m, TauVariant::Standard, &ratio(1, 4)).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, ExactRatio::from(&ratio(1, 2)));

        // Trivial event: both sides vanish.
        let trivial = crate::measures::Trivial::new(4, false);
        let r0 = check_term_identity(&trivial, &t, &m, TauVariant::Standard, &ratio(1, 4)).unwrap();
        assert!(r0.pass);
        assert_eq!(r0.lhs, ExactRatio::from(&BigRational::zero()));
        assert_eq!(r0.term_small, ExactRatio::from(&BigRational::zero()));
        assert_eq!(r0.term_large, ExactRatio::from(&BigRational::zero()));
    }

    #[test]
    fn claim_equality_on_small_suites() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = KOutOfN::new(4, 2).unwrap();
        let a = Dictator::new(4, 0).unwrap();
        let t = FixedOrderTree::new(vec![0, 1, 2, 3]).unwrap();
        let r = check_claim_distributional_equality(&a, &t, &m, TauVariant::Standard, 1).unwrap();
        assert!(r.pass, "{r:?}");

        let m63 = KOutOfN::new(6, 3).unwrap();
        for event in event_suite(6, 4, &mut rng) {
            let tree = HashSplitTree::new(6, 77).unwrap();
            for t_step in [1usize, 2] {
                let r = check_claim_distributional_equality(
                    event.as_ref(),
                    &tree,
                    &m63,
                    TauVariant::Standard,
                    t_step,
                )
                .unwrap();
                assert!(r.pass, "event={} t={t_step}", event.name());
            }
        }
    }

    #[test]
    fn budget_guard_rejects_large_instances() {
        let m = KOutOfN::new(20, 10).unwrap();
        let a = Dictator::new(20, 0).unwrap();
        let t = FixedOrderTree::new((0..20).collect()).unwrap();
        assert!(matches!(
            check_z_marginal(&a, &t, &m, TauVariant::Standard),
            Err(Error::EnumerationCap { .. })
        ));
    }
}
