use num::bigint::BigInt;
use num::rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Configuration, Event, KOutOfN};
use crate::percolation::TriangularBox;
use crate::report::ExactRatio;
use crate::unionfind::UnionFind;

/// Terminal node offsets appended after the box vertices in the union-find:
/// one for each side of the relevant crossing.
const SIDE_A: usize = 0;
const SIDE_B: usize = 1;

fn crossing_from_bools(
    grid: &TriangularBox,
    occupied: impl Fn(usize) -> bool,
    horizontal: bool,
    uf: &mut UnionFind,
) -> bool {
    let n = grid.vertex_count();
    uf.reset();
    let term_a = n + SIDE_A;
    let term_b = n + SIDE_B;
    for v in 0..n {
        if !occupied(v) {
            continue;
        }
        if horizontal {
            if grid.is_left(v) {
                uf.union(v, term_a);
            }
            if grid.is_right(v) {
                uf.union(v, term_b);
            }
        } else {
            if grid.is_top(v) {
                uf.union(v, term_a);
            }
            if grid.is_bottom(v) {
                uf.union(v, term_b);
            }
        }
        for w in grid.neighbors(v) {
            if w < v && occupied(w) {
                uf.union(v, w);
            }
        }
    }
    uf.connected(term_a, term_b)
}

/// True iff an occupied path joins the left side to the right side.
pub fn has_horizontal_crossing(grid: &TriangularBox, w: &Configuration) -> bool {
    let mut uf = UnionFind::new(grid.vertex_count() + 2);
    crossing_from_bools(grid, |v| w.get(v), true, &mut uf)
}

/// True iff a vacant path joins the top side to the bottom side; on this
/// lattice exactly one of the two crossings occurs.
pub fn has_vertical_vacant_crossing(grid: &TriangularBox, w: &Configuration) -> bool {
    let mut uf = UnionFind::new(grid.vertex_count() + 2);
    crossing_from_bools(grid, |v| !w.get(v), false, &mut uf)
}

/// The horizontal-crossing event as an increasing event on `{0,1}^{R^2}`.
#[derive(Debug, Clone)]
pub struct CrossingEvent {
    grid: TriangularBox,
}

impl CrossingEvent {
    pub fn new(grid: TriangularBox) -> Self {
        CrossingEvent { grid }
    }

    pub fn grid(&self) -> &TriangularBox {
        &self.grid
    }
}

impl Event for CrossingEvent {
    fn n(&self) -> usize {
        self.grid.vertex_count()
    }

    fn contains(&self, w: &Configuration) -> bool {
        has_horizontal_crossing(&self.grid, w)
    }

    fn name(&self) -> String {
        format!("crossing(R={})", self.grid.side())
    }
}

/// Reusable scratch for the fast pivotal scan.
#[derive(Debug, Clone)]
pub struct PivotalScratch {
    uf: UnionFind,
    occupied: Vec<bool>,
    ones: Vec<usize>,
}

impl PivotalScratch {
    pub fn new(grid: &TriangularBox) -> Self {
        let n = grid.vertex_count();
        PivotalScratch {
            uf: UnionFind::new(n + 2),
            occupied: vec![false; n],
            ones: Vec::with_capacity(n),
        }
    }

    pub fn load_ones(&mut self, ones: &[usize]) {
        for &v in &self.ones {
            self.occupied[v] = false;
        }
        self.ones.clear();
        self.ones.extend_from_slice(ones);
        for &v in ones {
            self.occupied[v] = true;
        }
    }

    pub fn load_configuration(&mut self, w: &Configuration) {
        for &v in &self.ones {
            self.occupied[v] = false;
        }
        self.ones.clear();
        self.ones.extend(w.iter_ones());
        for &v in &self.ones {
            self.occupied[v] = true;
        }
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    pub fn crossing(&mut self, grid: &TriangularBox) -> bool {
        let occ = &self.occupied;
        crossing_from_bools(grid, |v| occ[v], true, &mut self.uf)
    }

    /// One union-find pass yielding the crossing indicator and the 0-pivotal
    /// count; `marks`, when given, receives the pivotal vertex indices.
    ///
    /// The pass labels occupied clusters with left/right contact; flipping a
    /// vacant `v` creates a crossing exactly when `v` or its adjacent
    /// clusters reach the left side and, separately, the right side. When a
    /// crossing already exists no 0-flip can change the increasing event, so
    /// the count is zero.
    pub fn analyze(
        &mut self,
        grid: &TriangularBox,
        mut marks: Option<&mut Vec<usize>>,
    ) -> (bool, usize) {
        if let Some(m) = marks.as_deref_mut() {
            m.clear();
        }
        let n = grid.vertex_count();
        if self.crossing(grid) {
            return (true, 0);
        }
        let term_left = n + SIDE_A;
        let term_right = n + SIDE_B;
        let mut count = 0;
        for v in 0..n {
            if self.occupied[v] {
                continue;
            }
            let mut touches_left = grid.is_left(v);
            let mut touches_right = grid.is_right(v);
            for u in grid.neighbors(v) {
                if !self.occupied[u] {
                    continue;
                }
                if !touches_left && self.uf.connected(u, term_left) {
                    touches_left = true;
                }
                if !touches_right && self.uf.connected(u, term_right) {
                    touches_right = true;
                }
                if touches_left && touches_right {
                    break;
                }
            }
            if touches_left && touches_right {
                count += 1;
                if let Some(m) = marks.as_deref_mut() {
                    m.push(v);
                }
            }
        }
        (false, count)
    }

    pub fn count_zero_pivotal(
        &mut self,
        grid: &TriangularBox,
        marks: Option<&mut Vec<usize>>,
    ) -> usize {
        self.analyze(grid, marks).1
    }
}

/// Number of 0-pivotal vertices for the crossing event.
pub fn count_zero_pivotal(grid: &TriangularBox, w: &Configuration) -> usize {
    let mut scratch = PivotalScratch::new(grid);
    scratch.load_configuration(w);
    scratch.count_zero_pivotal(grid, None)
}

/// Reference implementation by literal flip recomputation; the definition
/// itself, kept as an independent route for cross-checks.
pub fn count_zero_pivotal_by_flips(grid: &TriangularBox, w: &Configuration) -> usize {
    let inside = has_horizontal_crossing(grid, w);
    let mut count = 0;
    for v in 0..grid.vertex_count() {
        if !w.get(v) {
            let flipped = w.flip(v).expect("in range");
            if has_horizontal_crossing(grid, &flipped) != inside {
                count += 1;
            }
        }
    }
    count
}

/// The four-arm pattern at a vacant vertex: occupied arms from neighbors (or
/// the boundary position itself) to the left and right sides in distinct
/// clusters, and vacant arms avoiding `v` to the top and bottom sides in
/// distinct clusters.
pub fn four_arm_witness(grid: &TriangularBox, w: &Configuration, v: usize) -> Result<bool> {
    let n = grid.vertex_count();
    if v >= n {
        return Err(Error::IndexOutOfRange { index: v, n });
    }
    if w.get(v) {
        return Err(Error::InvalidParameter(format!(
            "vertex {v} must be vacant for the four-arm pattern"
        )));
    }

    // Occupied clusters with left/right contact.
    let mut occ_uf = UnionFind::new(n + 2);
    let reaches_crossing = crossing_from_bools(grid, |u| w.get(u), true, &mut occ_uf);
    if reaches_crossing {
        // A crossing forbids any vacant top-bottom arm pair.
        return Ok(false);
    }
    let term_left = n + SIDE_A;
    let term_right = n + SIDE_B;
    let mut occ_left = grid.is_left(v);
    let mut occ_right = grid.is_right(v);
    for u in grid.neighbors(v) {
        if w.get(u) {
            occ_left = occ_left || occ_uf.connected(u, term_left);
            occ_right = occ_right || occ_uf.connected(u, term_right);
        }
    }
    if !(occ_left && occ_right) {
        return Ok(false);
    }

    // Vacant clusters in the configuration with v removed from the vacant
    // graph, labelled by top/bottom contact.
    let mut vac_uf = UnionFind::new(n + 2);
    vac_uf.reset();
    let term_top = n + SIDE_A;
    let term_bottom = n + SIDE_B;
    let vacant = |u: usize| !w.get(u) && u != v;
    for u in 0..n {
        if !vacant(u) {
            continue;
        }
        if grid.is_top(u) {
            vac_uf.union(u, term_top);
        }
        if grid.is_bottom(u) {
            vac_uf.union(u, term_bottom);
        }
        for x in grid.neighbors(u) {
            if x < u && vacant(x) {
                vac_uf.union(u, x);
            }
        }
    }
    let mut top_roots = Vec::new();
    let mut bottom_roots = Vec::new();
    for u in grid.neighbors(v) {
        if vacant(u) {
            let root = vac_uf.find(u);
            if vac_uf.connected(root, term_top) && !top_roots.contains(&root) {
                top_roots.push(root);
            }
            if vac_uf.connected(root, term_bottom) && !bottom_roots.contains(&root) {
                bottom_roots.push(root);
            }
        }
    }
    // A degenerate arm (v already on the target side) is disjoint from
    // everything; otherwise the two arms need clusters that can be chosen
    // distinct, since a shared cluster is a top-bottom vacant path avoiding v.
    let vac_top = grid.is_top(v) || !top_roots.is_empty();
    let vac_bottom = grid.is_bottom(v) || !bottom_roots.is_empty();
    if !(vac_top && vac_bottom) {
        return Ok(false);
    }
    if !grid.is_top(v) && !grid.is_bottom(v) {
        let disjoint_choice = top_roots
            .iter()
            .any(|t| bottom_roots.iter().any(|b| b != t));
        if !disjoint_choice {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact identity between the density increment of an increasing event and
/// its expected 0-pivotal count: `P_{k+1,n}(A) - P_{k,n}(A)` equals
/// `E_{k,n}(N^0) / (n - k)`.
#[derive(Debug, Clone, Serialize)]
pub struct RussoReport {
    pub n: usize,
    pub k: usize,
    pub event: String,
    pub lhs: ExactRatio,
    pub rhs: ExactRatio,
    pub pass: bool,
}

pub fn russo_check(event: &dyn Event, n: usize, k: usize) -> Result<RussoReport> {
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "the identity needs k <= n - 1, got k = {k}, n = {n}"
        )));
    }
    let at_k = KOutOfN::new(n, k)?;
    let at_k1 = KOutOfN::new(n, k + 1)?;
    let p_k = crate::measures::event_probability_exact(event, &at_k)?;
    let p_k1 = crate::measures::event_probability_exact(event, &at_k1)?;
    let lhs = &p_k1 - &p_k;

    let mut pivotal_total = 0u64;
    for w in at_k.enumerate()? {
        let inside = event.contains(&w);
        for e in 0..n {
            if !w.get(e) && event.contains(&w.flip(e)?) != inside {
                pivotal_total += 1;
            }
        }
    }
    let expectation = BigRational::new(
        BigInt::from(pivotal_total),
        BigInt::from(at_k.support_size()),
    );
    let rhs = expectation / BigRational::from(BigInt::from((n - k) as u64));
    let pass = lhs == rhs;
    Ok(RussoReport {
        n,
        k,
        event: event.name(),
        lhs: ExactRatio::from(&lhs),
        rhs: ExactRatio::from(&rhs),
        pass,
    })
}

/// Exact crossing probability by support enumeration (small boxes only).
pub fn crossing_probability_exact(r: usize, k: usize) -> Result<BigRational> {
    let grid = TriangularBox::new(r)?;
    let measure = KOutOfN::new(grid.vertex_count(), k)?;
    let mut hits = 0u64;
    for w in measure.enumerate()? {
        if has_horizontal_crossing(&grid, &w) {
            hits += 1;
        }
    }
    Ok(BigRational::new(
        BigInt::from(hits),
        BigInt::from(measure.support_size()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Dictator;
    use num::{One, Zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn config(grid: &TriangularBox, occupied: &[(usize, usize)]) -> Configuration {
        let ones: Vec<usize> = occupied.iter().map(|&(x, y)| grid.index(x, y)).collect();
        Configuration::from_ones(grid.vertex_count(), &ones).unwrap()
    }

    #[test]
    fn crossing_oracle_basics() {
        let grid = TriangularBox::new(2).unwrap();
        let all = Configuration::full(4);
        assert!(has_horizontal_crossing(&grid, &all));
        let none = Configuration::zeros(4);
        assert!(!has_horizontal_crossing(&grid, &none));
        // Bottom row alone crosses.
        let bottom = config(&grid, &[(0, 0), (1, 0)]);
        assert!(has_horizontal_crossing(&grid, &bottom));
        // Antidiagonal corners do not: (0,0) and (1,1) are not adjacent.
        let anti = config(&grid, &[(0, 0), (1, 1)]);
        assert!(!has_horizontal_crossing(&grid, &anti));
    }

    #[test]
    fn exactly_one_crossing_type_always_occurs() {
        for r in 1..=4usize {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            for bits in 0..1u64 << n {
                let w = Configuration::from_bits(
                    &(0..n).map(|v| bits >> v & 1 == 1).collect::<Vec<_>>(),
                );
                let horizontal = has_horizontal_crossing(&grid, &w);
                let vertical_vacant = has_vertical_vacant_crossing(&grid, &w);
                assert!(horizontal != vertical_vacant, "r={r} w={w}");
            }
        }
    }

    #[test]
    fn crossing_probability_is_half_at_r2_half_density() {
        assert_eq!(crossing_probability_exact(2, 2).unwrap(), ratio(1, 2));
        assert_eq!(
            crossing_probability_exact(2, 4).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            crossing_probability_exact(2, 0).unwrap(),
            BigRational::zero()
        );
    }

    #[test]
    fn pivotal_counts_on_the_two_vertex_examples() {
        let grid = TriangularBox::new(2).unwrap();
        // Top row occupied: crossing holds, so no vertex is 0-pivotal.
        let top = config(&grid, &[(0, 1), (1, 1)]);
        assert!(has_horizontal_crossing(&grid, &top));
        assert_eq!(count_zero_pivotal(&grid, &top), 0);
        // Left-bottom plus right-top: no crossing; both vacant vertices bridge.
        let anti = config(&grid, &[(0, 0), (1, 1)]);
        assert_eq!(count_zero_pivotal(&grid, &anti), 2);
        assert_eq!(count_zero_pivotal_by_flips(&grid, &anti), 2);
    }

    #[test]
    fn fast_scan_matches_flip_recomputation_exhaustively() {
        for r in [2usize, 3] {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            let mut scratch = PivotalScratch::new(&grid);
            for bits in 0..1u64 << n {
                let w = Configuration::from_bits(
                    &(0..n).map(|v| bits >> v & 1 == 1).collect::<Vec<_>>(),
                );
                scratch.load_configuration(&w);
                let fast = scratch.count_zero_pivotal(&grid, None);
                assert_eq!(fast, count_zero_pivotal_by_flips(&grid, &w), "r={r} w={w}");
            }
        }
    }

    #[test]
    fn fast_scan_matches_flip_recomputation_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for r in [4usize, 6, 8] {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            let measure = KOutOfN::new(n, n / 2).unwrap();
            let mut scratch = PivotalScratch::new(&grid);
            for _ in 0..300 {
                let w = measure.sample(&mut rng);
                scratch.load_configuration(&w);
                assert_eq!(
                    scratch.count_zero_pivotal(&grid, None),
                    count_zero_pivotal_by_flips(&grid, &w)
                );
            }
        }
    }

    #[test]
    fn four_arm_witness_agrees_with_pivotality() {
        let check_all_vertices = |grid: &TriangularBox, w: &Configuration| {
            let inside = has_horizontal_crossing(grid, w);
            for v in 0..grid.vertex_count() {
                if w.get(v) {
                    assert!(four_arm_witness(grid, w, v).is_err());
                    continue;
                }
                let pivotal = has_horizontal_crossing(grid, &w.flip(v).unwrap()) != inside;
                let witness = four_arm_witness(grid, w, v).unwrap();
                assert_eq!(witness, pivotal, "r={} v={v} w={w}", grid.side());
            }
        };
        // Exhaustive over every configuration on the tiny boxes.
        for r in [2usize, 3] {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            for bits in 0..1u64 << n {
                let w = Configuration::from_bits(
                    &(0..n).map(|v| bits >> v & 1 == 1).collect::<Vec<_>>(),
                );
                check_all_vertices(&grid, &w);
            }
        }
        // Sampled at half density on the larger ones.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for r in [4usize, 8] {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            let measure = KOutOfN::new(n, n / 2).unwrap();
            for _ in 0..200 {
                check_all_vertices(&grid, &measure.sample(&mut rng));
            }
        }
    }

    #[test]
    fn russo_identity_examples() {
        // Two-point case by hand: dictator on coordinate 0 with n=2, k=0.
        let d = Dictator::new(2, 0).unwrap();
        let report = russo_check(&d, 2, 0).unwrap();
        assert!(report.pass);
        assert_eq!(report.lhs, ExactRatio::from(&ratio(1, 2)));

        // The R=2 crossing event at every k.
        let grid = TriangularBox::new(2).unwrap();
        let crossing = CrossingEvent::new(grid);
        for k in 0..4 {
            let report = russo_check(&crossing, 4, k).unwrap();
            assert!(report.pass, "k={k}: {report:?}");
        }
        assert!(russo_check(&crossing, 4, 4).is_err());
    }

    #[test]
    fn russo_identity_on_random_monotone_events() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let event = crate::measures::random_monotone_dnf(10, &mut rng);
            for k in 0..10 {
                let report = russo_check(&event, 10, k).unwrap();
                assert!(report.pass, "event={} k={k}", event.name());
            }
        }
    }
}
