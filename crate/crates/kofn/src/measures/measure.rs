use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::Configuration;

/// Default guard for exact enumeration, in number of configurations.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// The measure that draws a uniformly random subset of size `k` from `n`
/// elements, seen as a distribution on 0/1 strings of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KOutOfN {
    n: usize,
    k: usize,
}

impl KOutOfN {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if k > n {
            return Err(Error::InvalidParameter(format!(
                "k = {k} must satisfy 0 <= k <= n = {n}"
            )));
        }
        Ok(KOutOfN { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of configurations in the support.
    pub fn support_size(&self) -> BigUint {
        binomial(self.n as u64, self.k as u64)
    }

    /// Exact point mass: 0 when the weight is off, `1 / binom(n, k)` otherwise.
    pub fn mass(&self, w: &Configuration) -> Result<BigRational> {
        if w.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: w.len(),
            });
        }
        if w.ones() != self.k {
            return Ok(BigRational::zero());
        }
        Ok(BigRational::new(
            BigInt::one(),
            BigInt::from(self.support_size()),
        ))
    }

    /// Draws a configuration with exactly `k` ones, uniformly, by a partial
    /// Fisher-Yates selection of `k` of the `n` indices.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let mut ones = Vec::with_capacity(self.k);
        self.sample_ones_into(&mut ones, rng);
        Configuration::from_ones(self.n, &ones).expect("sampled indices are valid")
    }

    /// Fills `ones` with the indices of a fresh uniform `k`-subset. Exposed so
    /// hot Monte Carlo loops can reuse buffers.
    pub fn sample_ones_into<R: Rng + ?Sized>(&self, ones: &mut Vec<usize>, rng: &mut R) {
        ones.clear();
        if self.k == 0 {
            return;
        }
        if self.k * 8 >= self.n {
            // Dense regime: partial Fisher-Yates on a materialized index array.
            let mut idx: Vec<usize> = (0..self.n).collect();
            for i in 0..self.k {
                let j = rng.gen_range(i..self.n);
                idx.swap(i, j);
                ones.push(idx[i]);
            }
        } else {
            // Sparse regime: same walk, with the array virtualized in a map.
            let mut moved = std::collections::HashMap::new();
            for i in 0..self.k {
                let j = rng.gen_range(i..self.n);
                let vj = *moved.get(&j).unwrap_or(&j);
                let vi = *moved.get(&i).unwrap_or(&i);
                moved.insert(j, vi);
                ones.push(vj);
            }
        }
    }

    /// Iterates the support in lexicographic order of bit vectors (element 0
    /// most significant), refusing when the support exceeds the default cap.
    pub fn enumerate(&self) -> Result<ConfigurationIter> {
        self.enumerate_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(&self, cap: u64) -> Result<ConfigurationIter> {
        let count = self.support_size();
        if count > BigUint::from(cap) {
            return Err(Error::EnumerationCap {
                n: self.n,
                k: self.k,
                count: count.to_string(),
                cap,
            });
        }
        Ok(ConfigurationIter::new(self.n, self.k))
    }

    /// Exact law of the number of disagreement points between two independent
    /// draws; `d = 2(k - overlap)` with hypergeometric overlap.
    pub fn disagreement_distribution(&self) -> DisagreementDistribution {
        let (n, k) = (self.n as u64, self.k as u64);
        let denom = BigInt::from(binomial(n, k));
        let lo = k.saturating_sub(n - k);
        let hi = k;
        let mut pmf = Vec::new();
        for overlap in lo..=hi {
            let ways =
                BigInt::from(binomial(k, overlap)) * BigInt::from(binomial(n - k, k - overlap));
            let p = BigRational::new(ways, denom.clone());
            let d = 2 * (k - overlap) as usize;
            pmf.push((d, p));
        }
        pmf.sort_by_key(|&(d, _)| d);
        DisagreementDistribution { pmf }
    }
}

/// Exact pmf of the disagreement count `d(X, Y)` for independent draws.
#[derive(Debug, Clone)]
pub struct DisagreementDistribution {
    pmf: Vec<(usize, BigRational)>,
}

impl DisagreementDistribution {
    pub fn pmf(&self) -> &[(usize, BigRational)] {
        &self.pmf
    }

    pub fn total_mass(&self) -> BigRational {
        self.pmf.iter().map(|(_, p)| p.clone()).sum()
    }

    pub fn expectation(&self) -> BigRational {
        self.pmf
            .iter()
            .map(|(d, p)| BigRational::from(BigInt::from(*d)) * p)
            .sum()
    }

    /// P(d < bound).
    pub fn prob_less_than(&self, bound: &BigRational) -> BigRational {
        self.pmf
            .iter()
            .filter(|(d, _)| &BigRational::from(BigInt::from(*d)) < bound)
            .map(|(_, p)| p.clone())
            .sum()
    }
}

/// Iterator over all weight-`k` configurations in lexicographic order.
///
/// The successor rule is the classic next-higher-integer-with-equal-popcount
/// step, applied to the bit vector read with element 0 as the most significant
/// bit: locate the maximal run of ones ending at the largest one `e_max`, move
/// its top one up to the zero just before the run, and pack the remainder of
/// the run at the very end of the vector.
#[derive(Debug)]
pub struct ConfigurationIter {
    n: usize,
    ones: Vec<usize>,
    exhausted: bool,
}

impl ConfigurationIter {
    fn new(n: usize, k: usize) -> Self {
        // First element in lex order: all ones packed at the highest indices.
        let ones: Vec<usize> = (n - k..n).collect();
        ConfigurationIter {
            n,
            ones,
            exhausted: false,
        }
    }

    fn advance(&mut self) {
        let k = self.ones.len();
        if k == 0 {
            self.exhausted = true;
            return;
        }
        let e_max = self.ones[k - 1];
        // Length of the run of consecutive ones ending at e_max.
        let mut run = 1;
        while run < k && self.ones[k - 1 - run] == e_max - run {
            run += 1;
        }
        if e_max < run {
            // Run is flush against element 0: that was the last configuration.
            self.exhausted = true;
            return;
        }
        let pivot = e_max - run;
        self.ones.truncate(k - run);
        self.ones.push(pivot);
        for i in 0..run - 1 {
            self.ones.push(self.n - run + 1 + i);
        }
        debug_assert_eq!(self.ones.len(), k);
    }
}

impl Iterator for ConfigurationIter {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.exhausted {
            return None;
        }
        let current = Configuration::from_ones(self.n, &self.ones).expect("valid positions");
        self.advance();
        Some(current)
    }
}

impl KOutOfN {
    /// Support size as f64, handy for guards; saturates for huge values.
    pub fn support_size_f64(&self) -> f64 {
        self.support_size().to_f64().unwrap_or(f64::INFINITY)
    }
}
