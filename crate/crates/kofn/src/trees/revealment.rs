use num::bigint::BigInt;
use num::rational::BigRational;
use rand::Rng;

use crate::error::Result;
use crate::measures::{Event, KOutOfN};
use crate::trees::{run_tree, DecisionTree, TauVariant};

/// Exact revealment probabilities: `delta[e]` is the probability that `e` is
/// queried by the stopping step. `sum(delta) = E[tau]` holds exactly.
#[derive(Debug, Clone)]
pub struct ExactRevealments {
    pub delta: Vec<BigRational>,
    pub average: BigRational,
    pub expected_tau: BigRational,
}

pub fn revealments_exact(
    tree: &dyn DecisionTree,
    event: &dyn Event,
    measure: &KOutOfN,
    variant: TauVariant,
) -> Result<ExactRevealments> {
    let n = measure.n();
    let mut counts = vec![0u64; n];
    let mut tau_total = 0u64;
    for w in measure.enumerate()? {
        let transcript = run_tree(tree, event, &w, variant)?;
        tau_total += transcript.tau as u64;
        for &e in &transcript.order {
            counts[e] += 1;
        }
    }
    let support = BigInt::from(measure.support_size());
    let delta: Vec<BigRational> = counts
        .iter()
        .map(|&c| BigRational::new(BigInt::from(c), support.clone()))
        .collect();
    let average = delta.iter().sum::<BigRational>() / BigRational::from(BigInt::from(n as u64));
    let expected_tau = BigRational::new(BigInt::from(tau_total), support);
    Ok(ExactRevealments {
        delta,
        average,
        expected_tau,
    })
}

/// Monte Carlo revealments with per-element standard errors.
#[derive(Debug, Clone)]
pub struct McRevealments {
    pub delta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub average: f64,
    /// Standard error of `average` (propagated from the stopping time).
    pub average_se: f64,
    pub mean_tau: f64,
    pub samples: u64,
}

pub fn revealments_mc<R: Rng + ?Sized>(
    tree: &dyn DecisionTree,
    event: &dyn Event,
    measure: &KOutOfN,
    samples: u64,
    rng: &mut R,
    variant: TauVariant,
) -> Result<McRevealments> {
    let n = measure.n();
    let mut hits = vec![0u64; n];
    let mut tau_total = 0u64;
    let mut tau_sq_total = 0u64;
    for _ in 0..samples {
        let w = measure.sample(rng);
        let transcript = run_tree(tree, event, &w, variant)?;
        tau_total += transcript.tau as u64;
        tau_sq_total += (transcript.tau as u64).pow(2);
        for &e in &transcript.order {
            hits[e] += 1;
        }
    }
    let mut delta = Vec::with_capacity(n);
    let mut std_errors = Vec::with_capacity(n);
    for &h in &hits {
        let (p, se) = crate::measures::indicator_mean_se(h, samples);
        delta.push(p);
        std_errors.push(se);
    }
    let average = delta.iter().sum::<f64>() / n as f64;
    let mean_tau = tau_total as f64 / samples as f64;
    // average = mean_tau / n, so its error comes from the tau sample variance.
    let tau_var = if samples > 1 {
        (tau_sq_total as f64 - samples as f64 * mean_tau * mean_tau) / (samples as f64 - 1.0)
    } else {
        0.0
    };
    let average_se = (tau_var.max(0.0) / samples as f64).sqrt() / n as f64;
    Ok(McRevealments {
        delta,
        std_errors,
        average,
        average_se,
        mean_tau,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Dictator, Threshold};
    use crate::trees::FixedOrderTree;
    use num::{One, ToPrimitive, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn first_query_dictator_reveals_only_its_coordinate() {
        let n = 10;
        let a = Dictator::new(n, 0).unwrap();
        let t = FixedOrderTree::new((0..n).collect()).unwrap();
        let m = KOutOfN::new(n, 5).unwrap();
        let r = revealments_exact(&t, &a, &m, TauVariant::Standard).unwrap();
        assert_eq!(r.delta[0], BigRational::one());
        for e in 1..n {
            assert_eq!(r.delta[e], BigRational::zero());
        }
        assert_eq!(r.average, ratio(1, 10));
        assert_eq!(r.expected_tau, BigRational::one());
    }

    #[test]
    fn dictator_on_last_forces_full_revealment() {
        for &(n, k) in &[(6usize, 3usize), (7, 2)] {
            let a = Dictator::new(n, n - 1).unwrap();
            let t = FixedOrderTree::new((0..n).collect()).unwrap();
            let m = KOutOfN::new(n, k).unwrap();
            let r = revealments_exact(&t, &a, &m, TauVariant::Standard).unwrap();
            for e in 0..n {
                assert_eq!(r.delta[e], BigRational::one());
            }
            assert_eq!(r.average, BigRational::one());
        }
    }

    #[test]
    fn majority_revealments_match_hand_enumeration() {
        // n=4, k=2, majority >=3 over all coordinates, identity order. The
        // standard stopping time is determined by hand below and frozen.
        let a = Threshold::majority(4);
        let t = FixedOrderTree::new(vec![0, 1, 2, 3]).unwrap();
        let m = KOutOfN::new(4, 2).unwrap();

        // Independent oracle: for each of the six weight-2 strings, compute tau
        // directly from the definition over all completions.
        let mut expect_counts = [0u64; 4];
        let mut expect_tau_total = 0u64;
        for w in m.enumerate().unwrap() {
            let mut tau = 4;
            'steps: for tcand in 1..=4usize {
                let mut agree = true;
                for bits in 0..16u32 {
                    let cand = crate::measures::Configuration::from_bits(
                        &(0..4).map(|e| bits >> e & 1 == 1).collect::<Vec<_>>(),
                    );
                    if (0..tcand).all(|e| cand.get(e) == w.get(e))
                        && a.contains(&cand) != a.contains(&w)
                    {
                        agree = false;
                        break;
                    }
                }
                if agree {
                    tau = tcand;
                    break 'steps;
                }
            }
            expect_tau_total += tau as u64;
            for e in 0..tau {
                expect_counts[e] += 1;
            }
        }

        let r = revealments_exact(&t, &a, &m, TauVariant::Standard).unwrap();
        for e in 0..4 {
            assert_eq!(r.delta[e], ratio(expect_counts[e] as i64, 6));
        }
        assert_eq!(r.expected_tau, ratio(expect_tau_total as i64, 6));
        let total: BigRational = r.delta.iter().sum();
        assert_eq!(total, r.expected_tau);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_within_four_sigma() {
        let n = 10;
        let a = Threshold::new(n, (0..n - 1).collect(), 5).unwrap();
        let t = FixedOrderTree::new((0..n).collect()).unwrap();
        let m = KOutOfN::new(n, 5).unwrap();
        let exact = revealments_exact(&t, &a, &m, TauVariant::Standard).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mc = revealments_mc(&t, &a, &m, 100_000, &mut rng, TauVariant::Standard).unwrap();
        for e in 0..n {
            let ex = exact.delta[e].to_f64().unwrap();
            let tol = 4.0 * mc.std_errors[e].max(1e-9);
            assert!(
                (mc.delta[e] - ex).abs() <= tol,
                "e={e} mc={} exact={ex}",
                mc.delta[e]
            );
        }
        let sum: f64 = mc.delta.iter().sum();
        assert!((sum - mc.mean_tau).abs() < 1e-9);
    }
}
