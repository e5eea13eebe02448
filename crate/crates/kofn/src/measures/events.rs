use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::Configuration;

/// An evaluatable event on `{0,1}^n`.
///
/// Implementations promise monotonicity: `w.leq(&v)` and `contains(&w)` imply
/// `contains(&v)`. The oracle is a black box, so the promise is a contract of
/// the constructor; [`check_monotone_exhaustive`] and [`check_monotone_sampled`]
/// spot-check it.
pub trait Event: Send + Sync {
    fn n(&self) -> usize;

    fn contains(&self, w: &Configuration) -> bool;

    fn name(&self) -> String;

    /// Minimal 1-sets, for events generated from an explicit monotone DNF.
    fn minterms(&self) -> Option<&[Vec<usize>]> {
        None
    }
}

fn mask_words(n: usize, coords: &[usize]) -> Vec<u64> {
    let mut words = vec![0u64; n.div_ceil(64)];
    for &e in coords {
        words[e >> 6] |= 1 << (e & 63);
    }
    words
}

/// `A = { w : w_coord = 1 }`.
#[derive(Debug, Clone)]
pub struct Dictator {
    n: usize,
    coord: usize,
}

impl Dictator {
    pub fn new(n: usize, coord: usize) -> Result<Self> {
        if coord >= n {
            return Err(Error::IndexOutOfRange { index: coord, n });
        }
        Ok(Dictator { n, coord })
    }

    pub fn coord(&self) -> usize {
        self.coord
    }
}

impl Event for Dictator {
    fn n(&self) -> usize {
        self.n
    }

    fn contains(&self, w: &Configuration) -> bool {
        w.get(self.coord)
    }

    fn name(&self) -> String {
        format!("dictator({})", self.coord)
    }
}

/// `A = { w : at least min_ones of coords are 1 }`.
#[derive(Debug, Clone)]
pub struct Threshold {
    n: usize,
    coords: Vec<usize>,
    min_ones: usize,
    mask: Vec<u64>,
}

impl Threshold {
    pub fn new(n: usize, coords: Vec<usize>, min_ones: usize) -> Result<Self> {
        let mut sorted = coords.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != coords.len() {
            return Err(Error::InvalidParameter("duplicate coordinates".into()));
        }
        if let Some(&bad) = sorted.iter().find(|&&e| e >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        let mask = mask_words(n, &sorted);
        Ok(Threshold {
            n,
            coords: sorted,
            min_ones,
            mask,
        })
    }

    /// Majority over all coordinates: strictly more ones than zeros.
    pub fn majority(n: usize) -> Self {
        Threshold::new(n, (0..n).collect(), n / 2 + 1).expect("valid")
    }
}

impl Event for Threshold {
    fn n(&self) -> usize {
        self.n
    }

    fn contains(&self, w: &Configuration) -> bool {
        w.ones_under_mask(&self.mask) >= self.min_ones
    }

    fn name(&self) -> String {
        if self.coords.len() == self.n {
            format!("threshold(>={})", self.min_ones)
        } else {
            format!("threshold(>={} of {:?})", self.min_ones, self.coords)
        }
    }
}

/// A monotone DNF: membership means some minterm is fully occupied.
#[derive(Debug, Clone)]
pub struct MonotoneDnf {
    n: usize,
    minterms: Vec<Vec<usize>>,
    masks: Vec<Vec<u64>>,
    label: String,
}

impl MonotoneDnf {
    /// Builds from minterms after sorting, deduplicating, and absorbing
    /// supersets so that the stored terms are genuinely minimal 1-sets.
    pub fn new(n: usize, minterms: Vec<Vec<usize>>, label: impl Into<String>) -> Result<Self> {
        if minterms.is_empty() {
            return Err(Error::InvalidParameter(
                "a monotone DNF needs at least one minterm".into(),
            ));
        }
        let mut terms: Vec<Vec<usize>> = Vec::new();
        for mut t in minterms {
            t.sort_unstable();
            t.dedup();
            if t.is_empty() {
                return Err(Error::InvalidParameter("empty minterm".into()));
            }
            if let Some(&bad) = t.iter().find(|&&e| e >= n) {
                return Err(Error::IndexOutOfRange { index: bad, n });
            }
            terms.push(t);
        }
        terms.sort();
        terms.dedup();
        // Absorption: drop any term that contains another term.
        let mut minimal: Vec<Vec<usize>> = Vec::new();
        for t in &terms {
            let absorbed = terms
                .iter()
                .any(|s| s != t && s.iter().all(|e| t.binary_search(e).is_ok()));
            if !absorbed {
                minimal.push(t.clone());
            }
        }
        let masks = minimal.iter().map(|t| mask_words(n, t)).collect();
        Ok(MonotoneDnf {
            n,
            minterms: minimal,
            masks,
            label: label.into(),
        })
    }

    /// Tribes: coordinates chopped into consecutive blocks of size
    /// `tribe_size` (the last block may be shorter); membership means some
    /// block is fully occupied.
    pub fn tribes(n: usize, tribe_size: usize) -> Result<Self> {
        if tribe_size == 0 || tribe_size > n {
            return Err(Error::InvalidParameter(format!(
                "tribe size {tribe_size} out of range for n = {n}"
            )));
        }
        let blocks: Vec<Vec<usize>> = (0..n)
            .collect::<Vec<_>>()
            .chunks(tribe_size)
            .map(|c| c.to_vec())
            .collect();
        MonotoneDnf::new(n, blocks, format!("tribes({tribe_size})"))
    }
}

impl Event for MonotoneDnf {
    fn n(&self) -> usize {
        self.n
    }

    fn contains(&self, w: &Configuration) -> bool {
        self.masks.iter().any(|m| w.covers_mask(m))
    }

    fn name(&self) -> String {
        self.label.clone()
    }

    fn minterms(&self) -> Option<&[Vec<usize>]> {
        Some(&self.minterms)
    }
}

/// The constant event, for degenerate-path tests.
#[derive(Debug, Clone)]
pub struct Trivial {
    n: usize,
    value: bool,
}

impl Trivial {
    pub fn new(n: usize, value: bool) -> Self {
        Trivial { n, value }
    }
}

impl Event for Trivial {
    fn n(&self) -> usize {
        self.n
    }

    fn contains(&self, _w: &Configuration) -> bool {
        self.value
    }

    fn name(&self) -> String {
        format!("trivial({})", self.value)
    }
}

/// Random monotone DNF with minterm count in `[1, 2n]` and widths in
/// `[1, ceil(n/2)]`.
pub fn random_monotone_dnf<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MonotoneDnf {
    let term_count = rng.gen_range(1..=2 * n);
    let max_width = n.div_ceil(2);
    let mut terms = Vec::with_capacity(term_count);
    for _ in 0..term_count {
        let width = rng.gen_range(1..=max_width);
        let mut coords: Vec<usize> = (0..n).collect();
        for i in 0..width {
            let j = rng.gen_range(i..n);
            coords.swap(i, j);
        }
        terms.push(coords[..width].to_vec());
    }
    MonotoneDnf::new(n, terms, format!("dnf(m={term_count})")).expect("valid terms")
}

/// A diverse family of increasing events used as a test surface.
pub fn event_suite<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<Arc<dyn Event>> {
    let mut suite: Vec<Arc<dyn Event>> = Vec::with_capacity(count);
    if count >= 1 {
        suite.push(Arc::new(Dictator::new(n, 0).expect("valid")));
    }
    if count >= 2 && n > 1 {
        suite.push(Arc::new(Dictator::new(n, n - 1).expect("valid")));
    }
    if count >= 3 && n > 1 {
        let coords: Vec<usize> = (0..n - 1).collect();
        let t = coords.len() / 2 + 1;
        suite.push(Arc::new(Threshold::new(n, coords, t).expect("valid")));
    }
    if count >= 4 && n >= 4 {
        suite.push(Arc::new(MonotoneDnf::tribes(n, 2).expect("valid")));
    }
    while suite.len() < count {
        suite.push(Arc::new(random_monotone_dnf(n, rng)));
    }
    suite.truncate(count);
    suite
}

/// Exhaustive single-step monotonicity check; cost `n * 2^n`.
pub fn check_monotone_exhaustive(event: &dyn Event) -> bool {
    let n = event.n();
    assert!(n <= 20, "exhaustive check is limited to small n");
    for bits in 0..1u64 << n {
        let w = Configuration::from_bits(&(0..n).map(|e| bits >> e & 1 == 1).collect::<Vec<_>>());
        if !event.contains(&w) {
            continue;
        }
        for e in 0..n {
            if !w.get(e) && !event.contains(&w.flip(e).expect("in range")) {
                return false;
            }
        }
    }
    true
}

/// Randomized monotonicity check over comparable pairs.
pub fn check_monotone_sampled<R: Rng + ?Sized>(
    event: &dyn Event,
    pairs: usize,
    rng: &mut R,
) -> bool {
    let n = event.n();
    for _ in 0..pairs {
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for _ in 0..n {
            // Uniform over the three comparable per-coordinate pairs.
            match rng.gen_range(0..3) {
                0 => {
                    lo.push(false);
                    hi.push(false);
                }
                1 => {
                    lo.push(false);
                    hi.push(true);
                }
                _ => {
                    lo.push(true);
                    hi.push(true);
                }
            }
        }
        let wl = Configuration::from_bits(&lo);
        let wh = Configuration::from_bits(&hi);
        if event.contains(&wl) && !event.contains(&wh) {
            return false;
        }
    }
    true
}
