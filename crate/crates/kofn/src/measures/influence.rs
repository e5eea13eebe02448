use num::bigint::BigInt;
use num::rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{Configuration, Event, KOutOfN};

/// Exactly one of `w` and `w^(e)` lies in the event.
pub fn is_pivotal(event: &dyn Event, w: &Configuration, e: usize) -> Result<bool> {
    let flipped = w.flip(e)?;
    Ok(event.contains(w) != event.contains(&flipped))
}

/// Pivotal with the current value 0.
pub fn is_zero_pivotal(event: &dyn Event, w: &Configuration, e: usize) -> Result<bool> {
    if e >= w.len() {
        return Err(Error::IndexOutOfRange {
            index: e,
            n: w.len(),
        });
    }
    Ok(!w.get(e) && is_pivotal(event, w, e)?)
}

/// Exactly one of `w` and `w^(e,f)` lies in the event.
pub fn is_pivotal_pair(event: &dyn Event, w: &Configuration, e: usize, f: usize) -> Result<bool> {
    if e == f {
        return Err(Error::InvalidParameter(
            "a pivotal pair needs two distinct points".into(),
        ));
    }
    let swapped = w.swap(e, f)?;
    Ok(event.contains(w) != event.contains(&swapped))
}

/// Per-element influences `I(e) = P(e is 0-pivotal)`, exact or estimated.
#[derive(Debug, Clone)]
pub enum InfluenceVector {
    Exact(Vec<BigRational>),
    MonteCarlo {
        values: Vec<f64>,
        std_errors: Vec<f64>,
        samples: u64,
    },
}

impl InfluenceVector {
    pub fn len(&self) -> usize {
        match self {
            InfluenceVector::Exact(v) => v.len(),
            InfluenceVector::MonteCarlo { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value_f64(&self, e: usize) -> f64 {
        match self {
            InfluenceVector::Exact(v) => {
                use num::ToPrimitive;
                v[e].to_f64().unwrap_or(f64::NAN)
            }
            InfluenceVector::MonteCarlo { values, .. } => values[e],
        }
    }
}

/// Exact probability of the event under the measure, by enumeration.
pub fn event_probability_exact(event: &dyn Event, measure: &KOutOfN) -> Result<BigRational> {
    let mut hits = 0u64;
    for w in measure.enumerate()? {
        if event.contains(&w) {
            hits += 1;
        }
    }
    Ok(BigRational::new(
        BigInt::from(hits),
        BigInt::from(measure.support_size()),
    ))
}

/// Exact influence of element `e` by full enumeration of the support.
pub fn influence_exact(event: &dyn Event, measure: &KOutOfN, e: usize) -> Result<BigRational> {
    if e >= measure.n() {
        return Err(Error::IndexOutOfRange {
            index: e,
            n: measure.n(),
        });
    }
    let mut count = 0u64;
    for w in measure.enumerate()? {
        if is_zero_pivotal(event, &w, e)? {
            count += 1;
        }
    }
    Ok(BigRational::new(
        BigInt::from(count),
        BigInt::from(measure.support_size()),
    ))
}

/// All influences in one enumeration pass.
pub fn influence_vector_exact(event: &dyn Event, measure: &KOutOfN) -> Result<InfluenceVector> {
    let n = measure.n();
    let mut counts = vec![0u64; n];
    for w in measure.enumerate()? {
        let inside = event.contains(&w);
        for e in 0..n {
            if !w.get(e) && event.contains(&w.flip(e)?) != inside {
                counts[e] += 1;
            }
        }
    }
    let denom = BigInt::from(measure.support_size());
    Ok(InfluenceVector::Exact(
        counts
            .into_iter()
            .map(|c| BigRational::new(BigInt::from(c), denom.clone()))
            .collect(),
    ))
}

/// Unbiased Monte Carlo estimate of `I(e)` with its standard error.
pub fn influence_mc<R: Rng + ?Sized>(
    event: &dyn Event,
    measure: &KOutOfN,
    e: usize,
    samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if e >= measure.n() {
        return Err(Error::IndexOutOfRange {
            index: e,
            n: measure.n(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mut hits = 0u64;
    for _ in 0..samples {
        let w = measure.sample(rng);
        if is_zero_pivotal(event, &w, e)? {
            hits += 1;
        }
    }
    Ok(indicator_mean_se(hits, samples))
}

/// All influences from one shared stream of samples.
pub fn influence_vector_mc<R: Rng + ?Sized>(
    event: &dyn Event,
    measure: &KOutOfN,
    samples: u64,
    rng: &mut R,
) -> Result<InfluenceVector> {
    let n = measure.n();
    let mut hits = vec![0u64; n];
    for _ in 0..samples {
        let w = measure.sample(rng);
        let inside = event.contains(&w);
        for e in 0..n {
            if !w.get(e) && event.contains(&w.flip(e)?) != inside {
                hits[e] += 1;
            }
        }
    }
    let mut values = Vec::with_capacity(n);
    let mut std_errors = Vec::with_capacity(n);
    for h in hits {
        let (v, se) = indicator_mean_se(h, samples);
        values.push(v);
        std_errors.push(se);
    }
    Ok(InfluenceVector::MonteCarlo {
        values,
        std_errors,
        samples,
    })
}

/// Mean and standard error (sample std over sqrt(samples)) of a 0/1 indicator.
pub(crate) fn indicator_mean_se(hits: u64, samples: u64) -> (f64, f64) {
    let p = hits as f64 / samples as f64;
    if samples < 2 {
        return (p, 0.0);
    }
    let var = p * (1.0 - p) * samples as f64 / (samples as f64 - 1.0);
    (p, (var / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Dictator, Threshold};
    use num::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn pivotality_examples() {
        let a = Dictator::new(2, 0).unwrap();
        let w = Configuration::from_bitstring("01").unwrap();
        assert!(is_zero_pivotal(&a, &w, 0).unwrap());
        assert!(!is_pivotal(&a, &w, 1).unwrap());

        // Majority on n=3, w=110: swapping coordinates 0 and 2 keeps membership.
        // In fact no pair is pivotal for a weight-symmetric event.
        let maj = Threshold::majority(3);
        let w = Configuration::from_bitstring("110").unwrap();
        assert!(!is_pivotal_pair(&maj, &w, 0, 2).unwrap());
        assert!(!is_pivotal_pair(&maj, &w, 1, 2).unwrap());

        // A dictator does have pivotal pairs.
        let d = Dictator::new(2, 0).unwrap();
        let w01 = Configuration::from_bitstring("01").unwrap();
        assert!(is_pivotal_pair(&d, &w01, 0, 1).unwrap());
        assert!(is_pivotal_pair(&d, &w01, 1, 0).unwrap());
        assert!(
            is_pivotal_pair(&d, &w01, 0, 1).unwrap() == is_pivotal_pair(&d, &w01, 1, 0).unwrap()
        );
        assert!(is_pivotal_pair(&d, &w01, 0, 0).is_err());
    }

    #[test]
    fn zero_pivotal_implies_flip_enters_event() {
        let maj = Threshold::majority(5);
        let m = KOutOfN::new(5, 2).unwrap();
        for w in m.enumerate().unwrap() {
            for e in 0..5 {
                if is_zero_pivotal(&maj, &w, e).unwrap() {
                    assert!(!w.get(e));
                    assert!(!maj.contains(&w));
                    assert!(maj.contains(&w.flip(e).unwrap()));
                }
            }
        }
    }

    #[test]
    fn dictator_influences() {
        let a = Dictator::new(10, 0).unwrap();
        let m = KOutOfN::new(10, 5).unwrap();
        assert_eq!(influence_exact(&a, &m, 0).unwrap(), ratio(1, 2));
        assert_eq!(influence_exact(&a, &m, 5).unwrap(), BigRational::zero());
    }

    #[test]
    fn majority_influence_matches_direct_enumeration() {
        // Independent oracle: count 0-pivotal configurations by hand over the
        // six weight-2 strings of length 4.
        let maj = Threshold::majority(4);
        let m = KOutOfN::new(4, 2).unwrap();
        let mut count = 0;
        for w in m.enumerate().unwrap() {
            let inside = maj.contains(&w);
            if !w.get(0) && maj.contains(&w.flip(0).unwrap()) != inside {
                count += 1;
            }
        }
        // Every weight-2 string with a 0 in coordinate 0 becomes weight 3 >= 3
        // after the flip, so exactly the three strings 0***.
        assert_eq!(count, 3);
        assert_eq!(influence_exact(&maj, &m, 0).unwrap(), ratio(3, 6));
    }

    #[test]
    fn monte_carlo_influence_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = Dictator::new(10, 0).unwrap();
        let m = KOutOfN::new(10, 5).unwrap();
        let (est, se) = influence_mc(&a, &m, 0, 100_000, &mut rng).unwrap();
        assert!((est - 0.5).abs() <= 3.0 * se, "est={est} se={se}");

        // Irrelevant coordinate never produces a positive count.
        let (est_irrelevant, _) = influence_mc(&a, &m, 5, 10_000, &mut rng).unwrap();
        assert_eq!(est_irrelevant, 0.0);

        let maj = Threshold::majority(4);
        let m4 = KOutOfN::new(4, 2).unwrap();
        let exact = influence_exact(&maj, &m4, 0).unwrap();
        use num::ToPrimitive;
        let exact_f = exact.to_f64().unwrap();
        let (est, se) = influence_mc(&maj, &m4, 0, 1_000_000, &mut rng).unwrap();
        assert!(
            (est - exact_f).abs() <= 3.0 * se,
            "est={est} exact={exact_f}"
        );
    }
}
