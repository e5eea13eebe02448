use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite ground set; elements are the indices `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "ground set must have at least one element".into(),
            ));
        }
        Ok(GroundSet { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.n
    }
}

/// A 0/1 assignment over a ground set, bit-packed, with a cached count of ones.
///
/// Bit `e` of word `e / 64` holds the value at element `e`. Trailing bits of
/// the last word are kept zero so that equality and hashing can work on the
/// raw words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    words: Vec<u64>,
    len: usize,
    ones: usize,
}

impl Configuration {
    /// The all-zeros configuration of length `n`.
    pub fn zeros(n: usize) -> Self {
        Configuration {
            words: vec![0; n.div_ceil(64)],
            len: n,
            ones: 0,
        }
    }

    /// The all-ones configuration of length `n`.
    pub fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if n % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (n % 64)) - 1;
            }
        }
        Configuration {
            words,
            len: n,
            ones: n,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut c = Configuration::zeros(bits.len());
        for (e, &b) in bits.iter().enumerate() {
            if b {
                c.set_unchecked(e, true);
            }
        }
        c
    }

    /// Builds a configuration of length `n` with ones exactly at `ones`.
    pub fn from_ones(n: usize, ones: &[usize]) -> Result<Self> {
        let mut c = Configuration::zeros(n);
        for &e in ones {
            if e >= n {
                return Err(Error::IndexOutOfRange { index: e, n });
            }
            if c.get(e) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate element {e} in ones list"
                )));
            }
            c.set_unchecked(e, true);
        }
        Ok(c)
    }

    /// Parses a string like `"0101"`; character `i` is the value at element `i`.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "bitstring may contain only 0 and 1, got {ch:?}"
                    )))
                }
            }
        }
        Ok(Configuration::from_bits(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of ones; cached, O(1).
    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn zeros_count(&self) -> usize {
        self.len - self.ones
    }

    /// Value at element `e`. Panics if `e` is out of range.
    pub fn get(&self, e: usize) -> bool {
        assert!(
            e < self.len,
            "element {e} out of range for length {}",
            self.len
        );
        (self.words[e >> 6] >> (e & 63)) & 1 == 1
    }

    /// In-place update for internal engines; public types stay immutable.
    pub(crate) fn set(&mut self, e: usize, v: bool) {
        assert!(e < self.len);
        self.set_unchecked(e, v);
    }

    fn set_unchecked(&mut self, e: usize, v: bool) {
        let w = &mut self.words[e >> 6];
        let mask = 1u64 << (e & 63);
        let was = *w & mask != 0;
        if v && !was {
            *w |= mask;
            self.ones += 1;
        } else if !v && was {
            *w &= !mask;
            self.ones -= 1;
        }
    }

    /// Copy with the value at `e` replaced by `1 - value`.
    pub fn flip(&self, e: usize) -> Result<Self> {
        if e >= self.len {
            return Err(Error::IndexOutOfRange {
                index: e,
                n: self.len,
            });
        }
        let mut c = self.clone();
        c.set_unchecked(e, !self.get(e));
        Ok(c)
    }

    /// Copy with the values at `e` and `f` exchanged.
    pub fn swap(&self, e: usize, f: usize) -> Result<Self> {
        for idx in [e, f] {
            if idx >= self.len {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    n: self.len,
                });
            }
        }
        let mut c = self.clone();
        let (ve, vf) = (self.get(e), self.get(f));
        c.set_unchecked(e, vf);
        c.set_unchecked(f, ve);
        Ok(c)
    }

    /// Copy with the value at `e` set to `v`.
    pub fn with_value(&self, e: usize, v: bool) -> Result<Self> {
        if e >= self.len {
            return Err(Error::IndexOutOfRange {
                index: e,
                n: self.len,
            });
        }
        let mut c = self.clone();
        c.set_unchecked(e, v);
        Ok(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |e| self.get(e))
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&e| self.get(e))
    }

    /// Coordinatewise comparison: `self ≤ other`.
    pub fn leq(&self, other: &Configuration) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Count of ones within the positions selected by `mask` (same word layout).
    pub(crate) fn ones_under_mask(&self, mask: &[u64]) -> usize {
        self.words
            .iter()
            .zip(mask)
            .map(|(w, m)| (w & m).count_ones() as usize)
            .sum()
    }

    /// True iff every position of `mask` holds a one in `self`.
    pub(crate) fn covers_mask(&self, mask: &[u64]) -> bool {
        self.words.iter().zip(mask).all(|(w, m)| w & m == *m)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({self})")
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on bit vectors with element 0 most significant; this is
/// also the enumeration order of [`crate::measures::KOutOfN::enumerate`].
impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter().zip(&other.words) {
            // Reversing bits makes element order agree with integer order.
            let ord = a.reverse_bits().cmp(&b.reverse_bits());
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_set_needs_at_least_one_element() {
        assert!(GroundSet::new(0).is_err());
        let g = GroundSet::new(5).unwrap();
        assert_eq!(g.size(), 5);
        assert_eq!(g.elements().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn flip_is_involution_and_changes_weight_by_one() {
        let w = Configuration::from_bitstring("0101").unwrap();
        let f = w.flip(0).unwrap();
        assert_eq!(f.to_string(), "1101");
        assert_eq!(f.ones(), w.ones() + 1);
        assert_eq!(f.flip(0).unwrap(), w);
        let g = w.flip(1).unwrap();
        assert_eq!(g.to_string(), "0001");
        assert_eq!(g.ones(), w.ones() - 1);
    }

    #[test]
    fn swap_examples() {
        let w = Configuration::from_bitstring("10").unwrap();
        assert_eq!(w.swap(0, 1).unwrap().to_string(), "01");
        let v = Configuration::from_bitstring("11").unwrap();
        assert_eq!(v.swap(0, 1).unwrap(), v);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let w = Configuration::zeros(3);
        assert!(w.flip(3).is_err());
        assert!(w.swap(0, 3).is_err());
    }

    #[test]
    fn lexicographic_order_puts_late_ones_first() {
        let a = Configuration::from_bitstring("001").unwrap();
        let b = Configuration::from_bitstring("010").unwrap();
        let c = Configuration::from_bitstring("100").unwrap();
        assert!(a < b && b < c);
    }

    #[test]
    fn leq_is_coordinatewise() {
        let a = Configuration::from_bitstring("0101").unwrap();
        let b = Configuration::from_bitstring("0111").unwrap();
        assert!(a.leq(&b));
        assert!(!b.leq(&a));
        assert!(a.leq(&a));
    }

    #[test]
    fn ones_cache_survives_long_configurations() {
        let ones: Vec<usize> = (0..200).filter(|e| e % 3 == 0).collect();
        let w = Configuration::from_ones(200, &ones).unwrap();
        assert_eq!(w.ones(), ones.len());
        assert_eq!(w.iter_ones().collect::<Vec<_>>(), ones);
    }
}
