use crate::error::{Error, Result};
use crate::measures::{Configuration, Event};
use crate::trees::{DecisionTree, TauVariant};

/// Completion budget for the fixed-weight determination check.
const FIXED_WEIGHT_ENUM_CAP: u64 = 5_000_000;

/// The record of one tree execution: the queried prefix, the revealed values,
/// the stopping step, and the emitted decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub order: Vec<usize>,
    pub values: Vec<bool>,
    pub tau: usize,
    pub decision: bool,
}

impl Transcript {
    pub fn history(&self) -> Vec<(usize, bool)> {
        self.order
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .collect()
    }
}

/// Tracks the interval of completions consistent with the revealed values.
///
/// For an increasing event, every completion lies between `low` (unrevealed
/// positions zero) and `high` (unrevealed positions one), so membership is
/// determined exactly when the two extremes agree. This is the completion
/// enumeration of the stopping-time definition with the earliest exit the
/// monotone contract allows.
struct Revealed {
    low: Configuration,
    high: Configuration,
    unrevealed: Vec<bool>,
    count_unrevealed: usize,
}

impl Revealed {
    fn new(n: usize) -> Self {
        Revealed {
            low: Configuration::zeros(n),
            high: Configuration::full(n),
            unrevealed: vec![true; n],
            count_unrevealed: n,
        }
    }

    fn reveal(&mut self, e: usize, v: bool) {
        self.low.set(e, v);
        self.high.set(e, v);
        self.unrevealed[e] = false;
        self.count_unrevealed -= 1;
    }

    fn determined_standard(&self, event: &dyn Event) -> bool {
        event.contains(&self.low) == event.contains(&self.high)
    }

    /// Determination against weight-k completions only, by enumeration with
    /// early exit; the two "extreme" placements are tried first.
    fn determined_fixed_weight(&self, event: &dyn Event, k: usize) -> Result<bool> {
        let ones_revealed = self.low.ones();
        if ones_revealed > k {
            // The input had weight k, so this cannot happen for valid runs.
            return Ok(true);
        }
        let r = k - ones_revealed;
        let free: Vec<usize> = (0..self.unrevealed.len())
            .filter(|&e| self.unrevealed[e])
            .collect();
        if r > free.len() {
            return Ok(true);
        }
        if r == 0 || r == free.len() {
            return Ok(true);
        }
        let count = crate::measures::binomial(free.len() as u64, r as u64);
        if count > num::BigUint::from(FIXED_WEIGHT_ENUM_CAP) {
            return Err(Error::EnumerationCap {
                n: free.len(),
                k: r,
                count: count.to_string(),
                cap: FIXED_WEIGHT_ENUM_CAP,
            });
        }
        let place = |positions: &[usize]| -> bool {
            let mut w = self.low.clone();
            for &p in positions {
                w.set(p, true);
            }
            event.contains(&w)
        };
        let reference = place(&free[..r]);
        if place(&free[free.len() - r..]) != reference {
            return Ok(false);
        }
        // Walk every r-subset of the free positions, bailing on disagreement.
        let mut choice: Vec<usize> = (0..r).collect();
        loop {
            let positions: Vec<usize> = choice.iter().map(|&i| free[i]).collect();
            if place(&positions) != reference {
                return Ok(false);
            }
            // Next combination in lexicographic index order.
            let mut i = r;
            loop {
                if i == 0 {
                    return Ok(true);
                }
                i -= 1;
                if choice[i] != i + free.len() - r {
                    break;
                }
                if i == 0 {
                    return Ok(true);
                }
            }
            choice[i] += 1;
            for j in i + 1..r {
                choice[j] = choice[j - 1] + 1;
            }
        }
    }

    fn determined(&self, event: &dyn Event, variant: TauVariant, k: usize) -> Result<bool> {
        match variant {
            TauVariant::Standard => Ok(self.determined_standard(event)),
            TauVariant::FixedWeight => self.determined_fixed_weight(event, k),
        }
    }
}

/// Executes the tree on `w`, stopping at the first step whose revealed values
/// determine membership among the variant's completions.
pub fn run_tree(
    tree: &dyn DecisionTree,
    event: &dyn Event,
    w: &Configuration,
    variant: TauVariant,
) -> Result<Transcript> {
    let n = w.len();
    if event.n() != n {
        return Err(Error::DimensionMismatch {
            expected: event.n(),
            got: n,
        });
    }
    if tree.n() != n {
        return Err(Error::DimensionMismatch {
            expected: tree.n(),
            got: n,
        });
    }
    let k = w.ones();
    let decision = event.contains(w);
    let mut history: Vec<(usize, bool)> = Vec::with_capacity(n);
    let mut revealed = Revealed::new(n);
    loop {
        let t = history.len() + 1;
        let e = if t == 1 {
            tree.first()
        } else {
            tree.next(&history)
        };
        if e >= n {
            return Err(Error::TreeContract(format!(
                "tree {} returned element {e} outside the ground set",
                tree.name()
            )));
        }
        if !revealed.unrevealed[e] {
            return Err(Error::TreeContract(format!(
                "tree {} re-queried element {e} at step {t}",
                tree.name()
            )));
        }
        let v = w.get(e);
        history.push((e, v));
        revealed.reveal(e, v);
        if revealed.determined(event, variant, k)? {
            let (order, values) = history.into_iter().unzip();
            return Ok(Transcript {
                order,
                values,
                tau: t,
                decision,
            });
        }
        debug_assert!(t < n, "full revelation always determines membership");
    }
}

/// Independent minimality check of a transcript's stopping step: membership
/// must be undetermined after `tau - 1` reveals and determined after `tau`,
/// verified by literal enumeration over completions (no monotone shortcut).
pub fn tau_certificate_check(
    event: &dyn Event,
    w: &Configuration,
    transcript: &Transcript,
    variant: TauVariant,
) -> Result<bool> {
    let n = w.len();
    if n > 20 {
        return Err(Error::EnumerationCap {
            n,
            k: w.ones(),
            count: format!("2^{n}"),
            cap: 1 << 20,
        });
    }
    let determined_after = |steps: usize| -> bool {
        let mut fixed: Vec<Option<bool>> = vec![None; n];
        for i in 0..steps {
            fixed[transcript.order[i]] = Some(transcript.values[i]);
        }
        let free: Vec<usize> = (0..n).filter(|&e| fixed[e].is_none()).collect();
        let base = Configuration::from_bits(
            &(0..n)
                .map(|e| fixed[e].unwrap_or(false))
                .collect::<Vec<_>>(),
        );
        let mut reference: Option<bool> = None;
        for bits in 0..1u64 << free.len() {
            let mut candidate = base.clone();
            for (i, &e) in free.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    candidate.set(e, true);
                }
            }
            if variant == TauVariant::FixedWeight && candidate.ones() != w.ones() {
                continue;
            }
            let value = event.contains(&candidate);
            match reference {
                None => reference = Some(value),
                Some(r) if r != value => return false,
                _ => {}
            }
        }
        true
    };
    let minimal = transcript.tau == 1 || !determined_after(transcript.tau - 1);
    Ok(minimal && determined_after(transcript.tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Dictator, Threshold, Trivial};
    use crate::trees::FixedOrderTree;

    fn identity_tree(n: usize) -> FixedOrderTree {
        FixedOrderTree::new((0..n).collect()).unwrap()
    }

    #[test]
    fn dictator_first_query_stops_immediately() {
        let n = 6;
        let a = Dictator::new(n, 0).unwrap();
        let t = identity_tree(n);
        for s in ["101010", "010101"] {
            let w = Configuration::from_bitstring(s).unwrap();
            let tr = run_tree(&t, &a, &w, TauVariant::Standard).unwrap();
            assert_eq!(tr.tau, 1);
            assert_eq!(tr.order, vec![0]);
            assert_eq!(tr.decision, a.contains(&w));
            assert!(tau_certificate_check(&a, &w, &tr, TauVariant::Standard).unwrap());
        }
    }

    #[test]
    fn dictator_on_last_with_fixed_order_reveals_everything() {
        let n = 7;
        let a = Dictator::new(n, n - 1).unwrap();
        let t = identity_tree(n);
        let m = crate::measures::KOutOfN::new(n, 3).unwrap();
        for w in m.enumerate().unwrap() {
            let tr = run_tree(&t, &a, &w, TauVariant::Standard).unwrap();
            assert_eq!(tr.tau, n);
            assert!(tau_certificate_check(&a, &w, &tr, TauVariant::Standard).unwrap());
        }
    }

    #[test]
    fn majority_example_stops_after_two_ones() {
        let a = Threshold::majority(3);
        let t = identity_tree(3);
        let w = Configuration::from_bitstring("110").unwrap();
        let tr = run_tree(&t, &a, &w, TauVariant::Standard).unwrap();
        assert_eq!(tr.tau, 2);
        assert!(tr.decision);
        assert!(tau_certificate_check(&a, &w, &tr, TauVariant::Standard).unwrap());
    }

    #[test]
    fn fixed_weight_stops_no_later_than_standard() {
        let n = 8;
        let m = crate::measures::KOutOfN::new(n, 4).unwrap();
        let a = Threshold::new(n, (0..n - 1).collect(), 4).unwrap();
        let t = identity_tree(n);
        for w in m.enumerate().unwrap() {
            let std = run_tree(&t, &a, &w, TauVariant::Standard).unwrap();
            let fw = run_tree(&t, &a, &w, TauVariant::FixedWeight).unwrap();
            assert!(fw.tau <= std.tau, "w={w}");
            assert!(tau_certificate_check(&a, &w, &fw, TauVariant::FixedWeight).unwrap());
        }
    }

    #[test]
    fn fixed_weight_uses_forced_tail() {
        // After the two leading ones of 1100 are revealed, weight-2 completions
        // are pinned down, so the fixed-weight run stops at step 2.
        let a = Dictator::new(4, 3).unwrap();
        let t = identity_tree(4);
        let w = Configuration::from_bitstring("1100").unwrap();
        let fw = run_tree(&t, &a, &w, TauVariant::FixedWeight).unwrap();
        assert_eq!(fw.tau, 2);
        let std = run_tree(&t, &a, &w, TauVariant::Standard).unwrap();
        assert_eq!(std.tau, 4);
    }

    #[test]
    fn trivial_event_stops_at_step_one() {
        let a = Trivial::new(5, true);
        let t = identity_tree(5);
        let w = Configuration::from_bitstring("00110").unwrap();
        let tr = run_tree(&t, &a, &w, TauVariant::Standard).unwrap();
        assert_eq!(tr.tau, 1);
        assert!(tau_certificate_check(&a, &w, &tr, TauVariant::Standard).unwrap());
    }

    #[test]
    fn contract_violations_are_reported() {
        struct Stubborn;
        impl DecisionTree for Stubborn {
            fn n(&self) -> usize {
                3
            }
            fn first(&self) -> usize {
                1
            }
            fn next(&self, _history: &[(usize, bool)]) -> usize {
                1
            }
            fn name(&self) -> String {
                "stubborn".into()
            }
        }
        let a = Dictator::new(3, 2).unwrap();
        let w = Configuration::from_bitstring("010").unwrap();
        assert!(matches!(
            run_tree(&Stubborn, &a, &w, TauVariant::Standard),
            Err(Error::TreeContract(_))
        ));
    }
}
