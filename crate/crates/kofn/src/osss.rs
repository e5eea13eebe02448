//! Both sides of the OSSS-type inequality for k-out-of-n measures, exact and
//! Monte Carlo, plus an empirical search for the best constant over generated
//! event/tree suites.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{FromPrimitive, One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{event_suite, Event, KOutOfN};
use crate::report::ExactRatio;
use crate::trees::{revealments_mc, run_tree, tree_suite, DecisionTree, TauVariant};

/// Exact evaluation of the inequality's two sides for one `(A, T, P_{k,n})`.
///
/// `lhs = P(A)(1 - P(A))`; `bracket = sum_e I(e) delta_e + sum_e I(e) *
/// delta_bar`. The inequality holds at a constant `C` exactly when
/// `lhs <= C * bracket`.
#[derive(Debug, Clone)]
pub struct ExactOsssReport {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub tree: String,
    pub p_event: BigRational,
    pub lhs: BigRational,
    pub weighted_term: BigRational,
    pub average_term: BigRational,
    pub bracket: BigRational,
    /// `lhs / bracket`; `None` flags the degenerate bracket with positive lhs,
    /// which an increasing nontrivial event can never produce.
    pub ratio: Option<BigRational>,
    pub degenerate: bool,
    pub influences: Vec<BigRational>,
    pub revealments: Vec<BigRational>,
    pub average_revealment: BigRational,
}

impl ExactOsssReport {
    pub fn holds_at(&self, c: &BigRational) -> bool {
        self.lhs <= c * &self.bracket
    }

    pub fn ratio_f64(&self) -> f64 {
        match &self.ratio {
            Some(r) => r.to_f64().unwrap_or(f64::NAN),
            None => f64::INFINITY,
        }
    }

    pub fn violation(&self) -> bool {
        self.ratio.is_none()
    }
}

pub fn verify_osss_exact(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    variant: TauVariant,
) -> Result<ExactOsssReport> {
    let n = measure.n();
    if event.n() != n || tree.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: event.n(),
        });
    }

    // One enumeration pass accumulates membership, 0-pivotality per element,
    // and revealment counts; all masses are equal so integer counts suffice.
    let mut member_hits = 0u64;
    let mut pivotal_hits = vec![0u64; n];
    let mut reveal_hits = vec![0u64; n];
    for w in measure.enumerate()? {
        let inside = event.contains(&w);
        if inside {
            member_hits += 1;
        }
        for e in 0..n {
            if !w.get(e) && event.contains(&w.flip(e)?) != inside {
                pivotal_hits[e] += 1;
            }
        }
        let transcript = run_tree(tree, event, &w, variant)?;
        for &e in &transcript.order {
            reveal_hits[e] += 1;
        }
    }

    let support = BigInt::from(measure.support_size());
    let to_ratio = |c: u64| BigRational::new(BigInt::from(c), support.clone());
    let p_event = to_ratio(member_hits);
    let lhs = &p_event * (BigRational::one() - &p_event);
    let influences: Vec<BigRational> = pivotal_hits.iter().map(|&c| to_ratio(c)).collect();
    let revealments: Vec<BigRational> = reveal_hits.iter().map(|&c| to_ratio(c)).collect();
    let average_revealment =
        revealments.iter().sum::<BigRational>() / BigRational::from_usize(n).expect("n > 0");

    let weighted_term: BigRational = influences
        .iter()
        .zip(&revealments)
        .map(|(i, d)| i * d)
        .sum();
    let total_influence: BigRational = influences.iter().sum();
    let average_term = &total_influence * &average_revealment;
    let bracket = &weighted_term + &average_term;

    let degenerate = lhs.is_zero();
    let ratio = if bracket.is_zero() {
        if lhs.is_zero() {
            Some(BigRational::zero())
        } else {
            None
        }
    } else {
        Some(&lhs / &bracket)
    };

    Ok(ExactOsssReport {
        n,
        k: measure.k(),
        event: event.name(),
        tree: tree.name(),
        p_event,
        lhs,
        weighted_term,
        average_term,
        bracket,
        ratio,
        degenerate,
        influences,
        revealments,
        average_revealment,
    })
}

/// Monte Carlo evaluation: influences and revealments come from two
/// independent sample streams so the bracket estimate is unbiased.
#[derive(Debug, Clone, Serialize)]
pub struct McOsssReport {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub tree: String,
    pub samples: u64,
    pub p_event: f64,
    pub lhs: f64,
    pub lhs_se: f64,
    pub weighted_term: f64,
    pub average_term: f64,
    pub bracket: f64,
    /// First-order error propagation across the independent streams.
    pub bracket_se: f64,
    pub ratio: f64,
}

impl McOsssReport {
    /// `lhs <= c * bracket` with a `sigmas`-wide tolerance on either side.
    pub fn holds_at_within(&self, c: f64, sigmas: f64) -> bool {
        let slack = sigmas * (self.lhs_se.powi(2) + (c * self.bracket_se).powi(2)).sqrt();
        self.lhs <= c * self.bracket + slack
    }
}

pub fn verify_osss_mc<R: Rng + ?Sized>(
    event: &dyn Event,
    tree: &dyn DecisionTree,
    measure: &KOutOfN,
    samples: u64,
    rng: &mut R,
    variant: TauVariant,
) -> Result<McOsssReport> {
    let n = measure.n();
    if event.n() != n || tree.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: event.n(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }

    // Stream one: membership and per-element 0-pivotality.
    let mut member_hits = 0u64;
    let mut pivotal_hits = vec![0u64; n];
    for _ in 0..samples {
        let w = measure.sample(rng);
        let inside = event.contains(&w);
        if inside {
            member_hits += 1;
        }
        for e in 0..n {
            if !w.get(e) && event.contains(&w.flip(e)?) != inside {
                pivotal_hits[e] += 1;
            }
        }
    }
    let (p_event, p_se) = crate::measures::indicator_mean_se(member_hits, samples);
    let influences: Vec<(f64, f64)> = pivotal_hits
        .iter()
        .map(|&h| crate::measures::indicator_mean_se(h, samples))
        .collect();

    // Stream two: revealments.
    let rev = revealments_mc(tree, event, measure, samples, rng, variant)?;

    let lhs = p_event * (1.0 - p_event);
    let lhs_se = (1.0 - 2.0 * p_event).abs() * p_se;
    let weighted_term: f64 = influences
        .iter()
        .zip(&rev.delta)
        .map(|(&(i, _), &d)| i * d)
        .sum();
    let total_influence: f64 = influences.iter().map(|&(i, _)| i).sum();
    let average_term = total_influence * rev.average;
    let bracket = weighted_term + average_term;

    let mut var = 0.0;
    for (e, &(i, i_se)) in influences.iter().enumerate() {
        let coeff = rev.delta[e] + rev.average;
        var += (coeff * i_se).powi(2);
        var += (i * rev.std_errors[e]).powi(2);
    }
    var += (total_influence * rev.average_se).powi(2);
    let bracket_se = var.sqrt();

    let ratio = if bracket > 0.0 {
        lhs / bracket
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };

    Ok(McOsssReport {
        n,
        k: measure.k(),
        event: event.name(),
        tree: tree.name(),
        samples,
        p_event,
        lhs,
        lhs_se,
        weighted_term,
        average_term,
        bracket,
        bracket_se,
        ratio,
    })
}

/// Instance specification for the empirical constant search.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteSpec {
    pub sizes: Vec<(usize, usize)>,
    pub events_per_size: usize,
    pub trees_per_size: usize,
    pub seed: u64,
    pub constants: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub variant: TauVariant,
}

impl SuiteSpec {
    pub fn new(
        sizes: Vec<(usize, usize)>,
        events_per_size: usize,
        trees_per_size: usize,
        seed: u64,
    ) -> Self {
        SuiteSpec {
            sizes,
            events_per_size,
            trees_per_size,
            seed,
            constants: vec![20.0],
            epsilons: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            variant: TauVariant::Standard,
        }
    }
}

/// One evaluated suite instance, exact underneath, rendered as floats for CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub tree: String,
    pub lhs: ExactRatio,
    pub weighted_term: ExactRatio,
    pub average_term: ExactRatio,
    pub ratio: f64,
    pub degenerate: bool,
    pub violation: bool,
    /// Exact `lhs <= c * bracket` verdict per requested constant.
    pub holds: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantSearchResult {
    pub rows: Vec<SuiteRow>,
    pub per_size_max: Vec<(usize, usize, f64)>,
    pub global_max_ratio: f64,
    /// For each epsilon, the worst ratio among sizes with `k` within
    /// `[eps * n, (1 - eps) * n]`.
    pub epsilon_view: Vec<(f64, f64)>,
    pub all_hold: Vec<(f64, bool)>,
}

/// Evaluates the exact inequality over generated suites and tabulates the
/// worst-case ratios.
pub fn search_constant(spec: &SuiteSpec) -> Result<ConstantSearchResult> {
    // Suites are regenerated per size from the spec seed, so rows are
    // reproducible and sizes can run in parallel.
    let rows: Result<Vec<SuiteRow>> = spec
        .sizes
        .par_iter()
        .enumerate()
        .map(|(size_idx, &(n, k))| -> Result<Vec<SuiteRow>> {
            let measure = KOutOfN::new(n, k)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (size_idx as u64) << 32);
            let events = event_suite(n, spec.events_per_size, &mut rng);
            let trees = tree_suite(n, spec.trees_per_size, &mut rng);
            let mut out = Vec::new();
            for event in &events {
                for tree in &trees {
                    let report =
                        verify_osss_exact(event.as_ref(), tree.as_ref(), &measure, spec.variant)?;
                    let holds = spec
                        .constants
                        .iter()
                        .map(|&c| {
                            let c_rat = BigRational::from_f64(c).unwrap_or_else(BigRational::zero);
                            report.holds_at(&c_rat)
                        })
                        .collect();
                    out.push(SuiteRow {
                        n,
                        k,
                        event: report.event.clone(),
                        tree: report.tree.clone(),
                        lhs: ExactRatio::from(&report.lhs),
                        weighted_term: ExactRatio::from(&report.weighted_term),
                        average_term: ExactRatio::from(&report.average_term),
                        ratio: report.ratio_f64(),
                        degenerate: report.degenerate,
                        violation: report.violation(),
                        holds,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<SuiteRow>>>>()
        .map(|v| v.into_iter().flatten().collect());
    let rows = rows?;

    let mut per_size_max = Vec::new();
    for &(n, k) in &spec.sizes {
        let max = rows
            .iter()
            .filter(|r| r.n == n && r.k == k)
            .map(|r| r.ratio)
            .fold(0.0f64, f64::max);
        per_size_max.push((n, k, max));
    }
    let global_max_ratio = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let epsilon_view = spec
        .epsilons
        .iter()
        .map(|&eps| {
            let max = rows
                .iter()
                .filter(|r| {
                    let kf = r.k as f64;
                    let nf = r.n as f64;
                    kf >= eps * nf && kf <= (1.0 - eps) * nf
                })
                .map(|r| r.ratio)
                .fold(0.0f64, f64::max);
            (eps, max)
        })
        .collect();
    let all_hold = spec
        .constants
        .iter()
        .enumerate()
        .map(|(ci, &c)| (c, rows.iter().all(|r| r.holds[ci])))
        .collect();

    Ok(ConstantSearchResult {
        rows,
        per_size_max,
        global_max_ratio,
        epsilon_view,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Dictator, Threshold, Trivial};
    use crate::trees::FixedOrderTree;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn dictator_first_query_report_is_exact() {
        // lhs = 1/4, I(0) = 1/2, delta_0 = 1, delta_bar = 1/10,
        // bracket = 1/2 + 1/20 = 11/20, ratio = 5/11.
        let a = Dictator::new(10, 0).unwrap();
        let t = FixedOrderTree::new((0..10).collect()).unwrap();
        let m = KOutOfN::new(10, 5).unwrap();
        let r = verify_osss_exact(&a, &t, &m, TauVariant::Standard).unwrap();
        assert_eq!(r.lhs, ratio(1, 4));
        assert_eq!(r.influences[0], ratio(1, 2));
        assert_eq!(r.revealments[0], BigRational::one());
        assert_eq!(r.average_revealment, ratio(1, 10));
        assert_eq!(r.weighted_term, ratio(1, 2));
        assert_eq!(r.average_term, ratio(1, 20));
        assert_eq!(r.bracket, ratio(11, 20));
        assert_eq!(r.ratio, Some(ratio(5, 11)));
        assert!(r.holds_at(&ratio(20, 1)));
        assert!(!r.holds_at(&ratio(1, 4)));
        assert!(!r.degenerate);
    }

    #[test]
    fn trivial_event_is_degenerate_with_zero_lhs() {
        let a = Trivial::new(6, true);
        let t = FixedOrderTree::new((0..6).collect()).unwrap();
        let m = KOutOfN::new(6, 3).unwrap();
        let r = verify_osss_exact(&a, &t, &m, TauVariant::Standard).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.lhs, BigRational::zero());
        assert!(r.holds_at(&BigRational::zero()));
        assert!(!r.violation());
    }

    #[test]
    fn majority_at_ten_holds_at_twenty() {
        let a = Threshold::majority(10);
        let t = FixedOrderTree::new((0..10).collect()).unwrap();
        let m = KOutOfN::new(10, 5).unwrap();
        let r = verify_osss_exact(&a, &t, &m, TauVariant::Standard).unwrap();
        assert!(r.holds_at(&ratio(20, 1)), "ratio = {:?}", r.ratio_f64());
    }

    #[test]
    fn mc_report_matches_exact_on_small_instances() {
        use rand::SeedableRng;
        let a = Threshold::new(8, (0..7).collect(), 4).unwrap();
        let t = FixedOrderTree::new((0..8).collect()).unwrap();
        let m = KOutOfN::new(8, 4).unwrap();
        let exact = verify_osss_exact(&a, &t, &m, TauVariant::Standard).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mc = verify_osss_mc(&a, &t, &m, 200_000, &mut rng, TauVariant::Standard).unwrap();
        let lhs_exact = exact.lhs.to_f64().unwrap();
        let bracket_exact = exact.bracket.to_f64().unwrap();
        assert!(
            (mc.lhs - lhs_exact).abs() <= 4.0 * mc.lhs_se.max(1e-9),
            "{mc:?}"
        );
        assert!(
            (mc.bracket - bracket_exact).abs() <= 4.0 * mc.bracket_se.max(1e-9),
            "mc bracket {} exact {bracket_exact} se {}",
            mc.bracket,
            mc.bracket_se
        );
    }

    #[test]
    fn search_constant_reports_the_dictator_ratio() {
        let spec = SuiteSpec::new(vec![(10, 5)], 1, 1, 3);
        let result = search_constant(&spec).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert!((result.global_max_ratio - 5.0 / 11.0).abs() < 1e-12);
        assert!(result.all_hold[0].1);
    }

    #[test]
    fn ratio_threshold_is_scale_consistent() {
        let a = Threshold::new(10, (0..9).collect(), 5).unwrap();
        let t = FixedOrderTree::new((0..10).collect()).unwrap();
        let m = KOutOfN::new(10, 5).unwrap();
        let r = verify_osss_exact(&a, &t, &m, TauVariant::Standard).unwrap();
        let ratio_value = r.ratio.clone().unwrap();
        for c in [ratio(1, 2), ratio(3, 1), ratio(20, 1)] {
            assert_eq!(r.holds_at(&c), ratio_value <= c);
        }
    }
}
