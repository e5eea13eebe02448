//! The sequential uniform encoding of a k-out-of-n draw, the exchange
//! coupling between consecutive densities under a shared seed, and the
//! hybrid-seed sum whose growth in `log n` separates that construction from
//! the matching-based one.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{Configuration, KOutOfN};
use crate::stats::mean_se;

/// A vector of reals in `[0, 1)` feeding the sequential encoder.
#[derive(Debug, Clone)]
pub struct UniformSeed {
    values: Vec<f64>,
}

impl UniformSeed {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|u| !(0.0..1.0).contains(u)) {
            return Err(Error::InvalidParameter(
                "seed entries must lie in [0, 1)".into(),
            ));
        }
        Ok(UniformSeed { values })
    }

    pub fn from_rng<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        UniformSeed {
            values: (0..len).map(|_| rng.gen::<f64>()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Sequentially turns uniforms into a weight-`k` string: position `t` becomes
/// zero exactly when `u_t` falls below the conditional probability of a zero,
/// which is (zeros remaining)/(positions remaining). Ties (`u` equal to the
/// threshold) resolve to one. Pushing independent uniforms through yields the
/// measure itself.
pub fn encode_fmu(measure: &KOutOfN, seed: &UniformSeed) -> Result<Configuration> {
    let n = measure.n();
    if seed.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: seed.len(),
        });
    }
    let mut out = Configuration::zeros(n);
    let mut zeros_left = n - measure.k();
    for (t, &u) in seed.values().iter().enumerate() {
        let slots = (n - t) as f64;
        let threshold = zeros_left as f64 / slots;
        if u < threshold {
            zeros_left -= 1;
        } else {
            out.set(t, true);
        }
    }
    debug_assert_eq!(out.ones(), measure.k());
    Ok(out)
}

/// Exact joint law of `(Z, Z')` where both strings are encoded from one
/// shared uniform seed at densities `k` and `k+1`: `Z'` adds a single one to
/// `Z`, uniformly among its zeros.
#[derive(Debug, Clone)]
pub struct CoupledPairLaw {
    m: usize,
    k: usize,
    entries: HashMap<(Configuration, Configuration), BigRational>,
}

impl CoupledPairLaw {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn prob(&self, alpha: &Configuration, beta: &Configuration) -> BigRational {
        self.entries
            .get(&(alpha.clone(), beta.clone()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn entries(&self) -> &HashMap<(Configuration, Configuration), BigRational> {
        &self.entries
    }

    pub fn total_mass(&self) -> BigRational {
        self.entries.values().cloned().sum()
    }

    pub fn z_marginal(&self) -> HashMap<Configuration, BigRational> {
        let mut out: HashMap<Configuration, BigRational> = HashMap::new();
        for ((a, _), p) in &self.entries {
            *out.entry(a.clone()).or_insert_with(BigRational::zero) += p;
        }
        out
    }

    pub fn z_prime_marginal(&self) -> HashMap<Configuration, BigRational> {
        let mut out: HashMap<Configuration, BigRational> = HashMap::new();
        for ((_, b), p) in &self.entries {
            *out.entry(b.clone()).or_insert_with(BigRational::zero) += p;
        }
        out
    }
}

/// Builds the exact pmf `P(Z = alpha, Z' = beta) = P_{k,m}(alpha) / (m - k)`
/// on pairs with `beta >= alpha`, `|alpha| = k`, `|beta| = k + 1`.
pub fn coupled_pair_law(m: usize, k: usize) -> Result<CoupledPairLaw> {
    if k == 0 || k >= m {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= m - 1, got k = {k}, m = {m}"
        )));
    }
    let measure = KOutOfN::new(m, k)?;
    let weight = BigRational::new(
        BigInt::one(),
        BigInt::from(measure.support_size()) * BigInt::from((m - k) as u64),
    );
    let mut entries = HashMap::new();
    for alpha in measure.enumerate()? {
        for p in 0..m {
            if !alpha.get(p) {
                let beta = alpha.flip(p)?;
                entries.insert((alpha.clone(), beta), weight.clone());
            }
        }
    }
    Ok(CoupledPairLaw { m, k, entries })
}

/// One shared-seed draw of the coupled pair.
pub fn shared_seed_pair<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<(Configuration, Configuration)> {
    let seed = UniformSeed::from_rng(m, rng);
    let z = encode_fmu(&KOutOfN::new(m, k)?, &seed)?;
    let z_prime = encode_fmu(&KOutOfN::new(m, k + 1)?, &seed)?;
    Ok((z, z_prime))
}

/// Total-variation distance between the empirical shared-seed joint law and
/// the exact pmf.
pub fn shared_seed_tv<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    samples: u64,
    rng: &mut R,
) -> Result<f64> {
    let law = coupled_pair_law(m, k)?;
    let mut counts: HashMap<(Configuration, Configuration), u64> = HashMap::new();
    for _ in 0..samples {
        let pair = shared_seed_pair(m, k, rng)?;
        *counts.entry(pair).or_insert(0) += 1;
    }
    let mut tv = 0.0;
    use num::ToPrimitive;
    let mut seen: std::collections::HashSet<&(Configuration, Configuration)> =
        std::collections::HashSet::new();
    for (pair, p) in law.entries() {
        let emp = counts.get(pair).copied().unwrap_or(0) as f64 / samples as f64;
        tv += (emp - p.to_f64().expect("small rational")).abs();
        seen.insert(pair);
    }
    for (pair, c) in &counts {
        if !seen.contains(pair) {
            tv += *c as f64 / samples as f64;
        }
    }
    Ok(tv / 2.0)
}

/// Monte Carlo estimate of the hybrid-seed sum: for each step `t`, the
/// probability that swapping the seed at position `t` from fresh to resampled
/// flips membership in `A = {w_n = 1}` under the fixed query order.
#[derive(Debug, Clone)]
pub struct LognEstimate {
    pub n: usize,
    pub samples: u64,
    /// Per-step means and standard errors.
    pub per_t: Vec<(f64, f64)>,
    pub sum: f64,
    pub sum_se: f64,
}

/// Estimates the per-step disagreement probabilities for `A = {w_n = 1}`.
///
/// Within one sample, a single `(U, V)` seed pair is shared across all steps.
/// The consecutive hybrids `W_t = F(V_{<t}, U_{>=t})` and `W_{t+1}` share all
/// seeds except position `t`, so the sample walks the chain `W_1 .. W_{n+1}`
/// and marks the steps whose two strings differ at the last position. When a
/// step diverges, the two encodings differ at `t` and at exactly one later
/// position where the deficit in ones is repaid; only that repayment position
/// needs to be located.
pub fn logn_sum_estimate<R: Rng + ?Sized>(
    n: usize,
    samples: u64,
    rng: &mut R,
) -> Result<LognEstimate> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "the demonstration needs even n >= 2, got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let k = n / 2;
    let zeros_total = n - k;

    let mut per_t_hits = vec![0u64; n];
    let mut sum_s = 0u64;
    let mut sum_s_sq = 0u64;
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];
    let mut prefix_state = vec![0usize; n];

    for _ in 0..samples {
        for x in u.iter_mut() {
            *x = rng.gen();
        }
        for x in v.iter_mut() {
            *x = rng.gen();
        }
        // prefix_state[t] = zeros consumed by the V-encoded prefix before
        // position t (0-indexed).
        let mut zeros_used = 0usize;
        for t in 0..n {
            prefix_state[t] = zeros_used;
            let threshold = (zeros_total - zeros_used) as f64 / (n - t) as f64;
            if v[t] < threshold {
                zeros_used += 1;
            }
        }

        let mut s_this = 0u64;
        for t in 0..n {
            let threshold = (zeros_total - prefix_state[t]) as f64 / (n - t) as f64;
            let a_zero = u[t] < threshold;
            let b_zero = v[t] < threshold;
            if a_zero == b_zero {
                continue;
            }
            // One chain consumed an extra zero; follow both on the shared
            // suffix seeds until the lagging chain repays the one. Equal final
            // weights force repayment by the last position.
            let mut s_hi = prefix_state[t] + 1; // chain that took the zero
            let mut s_lo = prefix_state[t];
            let mut coalesce_at = None;
            for j in t + 1..n {
                let slots = (n - j) as f64;
                let th_hi = (zeros_total - s_hi) as f64 / slots;
                let th_lo = (zeros_total - s_lo) as f64 / slots;
                let uj = u[j];
                if uj < th_hi {
                    s_hi += 1;
                    s_lo += 1;
                } else if uj >= th_lo {
                    // both take a one
                } else {
                    coalesce_at = Some(j);
                    break;
                }
            }
            debug_assert!(coalesce_at.is_some());
            // The two hybrids differ exactly at t and the repayment position;
            // the term fires when the latter is the final coordinate.
            if coalesce_at == Some(n - 1) {
                per_t_hits[t] += 1;
                s_this += 1;
            }
        }
        sum_s += s_this;
        sum_s_sq += s_this * s_this;
    }

    let per_t: Vec<(f64, f64)> = per_t_hits
        .iter()
        .map(|&h| crate::measures::indicator_mean_se(h, samples))
        .collect();
    let sum = sum_s as f64 / samples as f64;
    let var = if samples > 1 {
        (sum_s_sq as f64 - samples as f64 * sum * sum) / (samples as f64 - 1.0)
    } else {
        0.0
    };
    let sum_se = (var.max(0.0) / samples as f64).sqrt();
    Ok(LognEstimate {
        n,
        samples,
        per_t,
        sum,
        sum_se,
    })
}

/// Deterministic parallel version over worker streams.
pub fn logn_sum_estimate_par(
    n: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<LognEstimate> {
    let partials: Vec<Result<LognEstimate>> =
        crate::rngstream::par_streams(seed, streams, samples, |_, count, rng| {
            logn_sum_estimate(n, count.max(1), rng)
        });
    let mut estimates = Vec::new();
    for p in partials {
        estimates.push(p?);
    }
    // Combine as a weighted mixture of the per-stream estimates.
    let total: u64 = estimates.iter().map(|e| e.samples).sum();
    let mut per_t = vec![(0.0, 0.0); n];
    let mut sum = 0.0;
    let mut sum_var = 0.0;
    for e in &estimates {
        let wgt = e.samples as f64 / total as f64;
        for t in 0..n {
            per_t[t].0 += wgt * e.per_t[t].0;
            per_t[t].1 += (wgt * e.per_t[t].1).powi(2);
        }
        sum += wgt * e.sum;
        sum_var += (wgt * e.sum_se).powi(2);
    }
    for entry in per_t.iter_mut() {
        entry.1 = entry.1.sqrt();
    }
    Ok(LognEstimate {
        n,
        samples: total,
        per_t,
        sum,
        sum_se: sum_var.sqrt(),
    })
}

/// Reference implementation of one hybrid term, by direct re-encoding; used
/// to cross-check the fast chain walk.
pub fn logn_term_direct<R: Rng + ?Sized>(
    n: usize,
    t: usize,
    samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if n % 2 != 0 || t == 0 || t > n {
        return Err(Error::InvalidParameter(
            "need even n and 1 <= t <= n".into(),
        ));
    }
    let measure = KOutOfN::new(n, n / 2)?;
    let mut hits = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let u = UniformSeed::from_rng(n, rng);
        let v = UniformSeed::from_rng(n, rng);
        let mut left = v.values()[..t - 1].to_vec();
        left.extend_from_slice(&u.values()[t - 1..]);
        let mut right = v.values()[..t].to_vec();
        right.extend_from_slice(&u.values()[t..]);
        let w_left = encode_fmu(&measure, &UniformSeed::new(left)?)?;
        let w_right = encode_fmu(&measure, &UniformSeed::new(right)?)?;
        hits.push(f64::from(w_left.get(n - 1) != w_right.get(n - 1)));
    }
    Ok(mean_se(&hits))
}
