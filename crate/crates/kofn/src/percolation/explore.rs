use crate::error::{Error, Result};
use crate::measures::Configuration;
use crate::percolation::lattice::NEIGHBOR_OFFSETS;
use crate::percolation::TriangularBox;
use crate::trees::DecisionTree;

/// The two interface walks hanging off one anchor: the first decides whether
/// an occupied path joins the left side to the right-side rows at or above the
/// anchor, the second the rows at or below it. Together they decide the
/// horizontal crossing while revealing only the hexagons the interfaces touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Above,
    Below,
}

/// Color of a queried hexagon: a real site's state, a fixed virtual boundary
/// color, or a walk-terminating verdict.
enum HexColor {
    White,
    Black,
    Decide(bool),
}

/// Exploration decision tree anchored at a right-side vertex.
///
/// Sites render as hexagons, white when occupied. Out-of-box hexagons carry
/// fixed colors chosen so each walk keeps white on its right, black on its
/// left, with the white shore anchored to the targeted stretch of the right
/// side and the black shore to the complementary arc through the bottom.
/// Touching beyond the left side certifies the crossing; touching beyond the
/// top (or, for the lower walk, the right-side rows above the anchor)
/// certifies the blocking vacant path. The decision always equals the
/// union-find oracle; that equivalence is the correctness contract.
#[derive(Debug, Clone)]
pub struct ExplorationTree {
    grid: TriangularBox,
    anchor_y: usize,
}

/// Reusable first-touch tracker for walk transcripts.
#[derive(Debug, Clone)]
pub struct RevealRecorder {
    stamp: Vec<u32>,
    epoch: u32,
    pub order: Vec<usize>,
}

impl RevealRecorder {
    pub fn new(n: usize) -> Self {
        RevealRecorder {
            stamp: vec![0; n],
            epoch: 0,
            order: Vec::new(),
        }
    }

    pub fn begin(&mut self) {
        self.epoch += 1;
        self.order.clear();
    }

    fn note(&mut self, v: usize) {
        if self.stamp[v] != self.epoch {
            self.stamp[v] = self.epoch;
            self.order.push(v);
        }
    }
}

/// Outcome of one transcript produced by the walker.
#[derive(Debug, Clone)]
pub struct ExplorationRun {
    pub revealed: Vec<usize>,
    pub decision: bool,
}

enum WalkStatus {
    Decided(bool),
    /// The walker needs the color of this still-unknown site.
    Need(usize),
}

impl ExplorationTree {
    pub fn new(grid: TriangularBox, anchor: usize) -> Result<Self> {
        if anchor >= grid.vertex_count() || !grid.is_right(anchor) {
            return Err(Error::InvalidParameter(format!(
                "anchor {anchor} is not on the right side of the box"
            )));
        }
        Ok(ExplorationTree {
            grid,
            anchor_y: anchor / grid.side(),
        })
    }

    pub fn anchor(&self) -> usize {
        self.grid.index(self.grid.side() - 1, self.anchor_y)
    }

    pub fn grid(&self) -> &TriangularBox {
        &self.grid
    }

    fn virtual_color(&self, phase: Phase, x: i32, y: i32) -> Result<HexColor> {
        let r = self.grid.side() as i32;
        let y0 = self.anchor_y as i32;
        match phase {
            // White shore anchored to the right side at rows >= y0; black
            // shore anchored to the bottom and the right side below y0.
            // Reaching past the left side means the white shore joined the
            // target to the left side; reaching past the top means the black
            // shore runs from the bottom arc to the top, which blocks.
            Phase::Above => {
                if x == r && (0..r).contains(&y) {
                    return Ok(if y >= y0 {
                        HexColor::White
                    } else {
                        HexColor::Black
                    });
                }
                if y == -1 && (0..=r).contains(&x) {
                    return Ok(HexColor::Black);
                }
                if x < 0 {
                    return Ok(HexColor::Decide(true));
                }
                if y >= r {
                    return Ok(HexColor::Decide(false));
                }
            }
            // White shore anchored to the right side at rows <= y0; black
            // shore anchored to the right side above y0, continued along the
            // top. Reaching past the left side certifies the crossing;
            // reaching past the bottom closes the blocking vacant arc.
            Phase::Below => {
                if x == r && (0..r).contains(&y) {
                    return Ok(if y <= y0 {
                        HexColor::White
                    } else {
                        HexColor::Black
                    });
                }
                if x < 0 {
                    return Ok(HexColor::Decide(true));
                }
                if y < 0 {
                    return Ok(HexColor::Decide(false));
                }
                if y >= r && x <= r {
                    return Ok(HexColor::Black);
                }
            }
        }
        Err(Error::Exploration(format!(
            "walker queried hexagon ({x}, {y}) outside its domain"
        )))
    }

    /// One interface walk. `know` resolves in-box colors, returning `None`
    /// when the value is not yet available to the caller.
    fn walk<F>(&self, phase: Phase, know: &mut F) -> Result<WalkStatus>
    where
        F: FnMut(usize) -> Option<bool>,
    {
        let r = self.grid.side() as i32;
        let y0 = self.anchor_y as i32;
        // Directed hex edge as (white-side hexagon, black-side hexagon, the
        // hexagon ahead = third member of the vertex triangle being entered).
        // Both walks start on the ring edge at the anchor, heading into the
        // box; the color-change orientation fixes the travel direction.
        let (mut white, mut black, mut ahead) = match phase {
            Phase::Above => ((r, y0), (r, y0 - 1), (r - 1, y0)),
            Phase::Below => ((r, y0), (r, y0 + 1), (r - 1, y0 + 1)),
        };
        // Each hex-lattice vertex admits at most one pass, so the edge count
        // of the padded region bounds the walk length.
        let limit = 16 * ((self.grid.side() + 2) * (self.grid.side() + 2)) + 16;
        for _ in 0..limit {
            let (ax, ay) = ahead;
            let color = if self.grid.contains(ax, ay) {
                let v = self.grid.index(ax as usize, ay as usize);
                match know(v) {
                    Some(true) => HexColor::White,
                    Some(false) => HexColor::Black,
                    None => return Ok(WalkStatus::Need(v)),
                }
            } else {
                self.virtual_color(phase, ax, ay)?
            };
            match color {
                HexColor::Decide(d) => return Ok(WalkStatus::Decided(d)),
                HexColor::White => {
                    let next_ahead = other_common(ahead, black, white);
                    white = ahead;
                    ahead = next_ahead;
                }
                HexColor::Black => {
                    let next_ahead = other_common(white, ahead, black);
                    black = ahead;
                    ahead = next_ahead;
                }
            }
        }
        Err(Error::Exploration("walk exceeded its step budget".into()))
    }

    /// Runs the two walks in order, short-circuiting once the crossing is
    /// decided.
    fn decide<F>(&self, know: &mut F) -> Result<WalkStatus>
    where
        F: FnMut(usize) -> Option<bool>,
    {
        match self.walk(Phase::Above, know)? {
            WalkStatus::Need(v) => Ok(WalkStatus::Need(v)),
            WalkStatus::Decided(true) => Ok(WalkStatus::Decided(true)),
            WalkStatus::Decided(false) => self.walk(Phase::Below, know),
        }
    }

    /// Native execution against a full occupancy slice, recording first
    /// touches in order.
    pub fn run_on(&self, occupied: &[bool], recorder: &mut RevealRecorder) -> Result<bool> {
        recorder.begin();
        let status = {
            let stamp = &mut *recorder;
            self.decide(&mut |v| {
                stamp.note(v);
                Some(occupied[v])
            })?
        };
        match status {
            WalkStatus::Decided(d) => Ok(d),
            WalkStatus::Need(_) => unreachable!("all colors available"),
        }
    }

    pub fn run_configuration(&self, w: &Configuration) -> Result<ExplorationRun> {
        let occupied: Vec<bool> = (0..w.len()).map(|v| w.get(v)).collect();
        let mut recorder = RevealRecorder::new(w.len());
        let decision = self.run_on(&occupied, &mut recorder)?;
        Ok(ExplorationRun {
            revealed: recorder.order.clone(),
            decision,
        })
    }
}

impl DecisionTree for ExplorationTree {
    fn n(&self) -> usize {
        self.grid.vertex_count()
    }

    fn first(&self) -> usize {
        self.anchor()
    }

    fn next(&self, history: &[(usize, bool)]) -> usize {
        let known: std::collections::HashMap<usize, bool> = history.iter().copied().collect();
        let status = self.decide(&mut |v| known.get(&v).copied());
        match status {
            Ok(WalkStatus::Need(v)) => v,
            // The walk already decided (or failed); stay total by falling
            // back to the first unqueried element.
            _ => (0..self.n())
                .find(|v| !known.contains_key(v))
                .expect("runner stops before exhausting the ground set"),
        }
    }

    fn name(&self) -> String {
        format!(
            "exploration(R={}, anchor_y={})",
            self.grid.side(),
            self.anchor_y
        )
    }
}

fn offset_index(d: (i32, i32)) -> usize {
    NEIGHBOR_OFFSETS
        .iter()
        .position(|&o| o == d)
        .expect("difference of adjacent hexagons is a unit offset")
}

/// The two hexagons adjacent to both `p` and `q` are `p + rot(d, ±60°)` for
/// `d = q - p`; this returns the one that differs from `exclude`.
fn other_common(p: (i32, i32), q: (i32, i32), exclude: (i32, i32)) -> (i32, i32) {
    let d = (q.0 - p.0, q.1 - p.1);
    let idx = offset_index(d);
    let ccw = NEIGHBOR_OFFSETS[(idx + 1) % 6];
    let cw = NEIGHBOR_OFFSETS[(idx + 5) % 6];
    let c1 = (p.0 + ccw.0, p.1 + ccw.1);
    let c2 = (p.0 + cw.0, p.1 + cw.1);
    if c1 == exclude {
        c2
    } else {
        debug_assert_eq!(c2, exclude, "walker edge lost its triangle");
        c1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::KOutOfN;
    use crate::percolation::crossing::has_horizontal_crossing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_anchors(grid: &TriangularBox) -> Vec<ExplorationTree> {
        grid.right_side()
            .map(|v| ExplorationTree::new(*grid, v).unwrap())
            .collect()
    }

    #[test]
    fn anchor_must_sit_on_the_right_side() {
        let grid = TriangularBox::new(3).unwrap();
        assert!(ExplorationTree::new(grid, grid.index(1, 1)).is_err());
        assert!(ExplorationTree::new(grid, grid.index(2, 1)).is_ok());
    }

    #[test]
    fn decision_matches_oracle_exhaustively_on_small_boxes() {
        for r in 1..=4usize {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            let trees = all_anchors(&grid);
            for bits in 0..1u64 << n {
                let w = Configuration::from_bits(
                    &(0..n).map(|v| bits >> v & 1 == 1).collect::<Vec<_>>(),
                );
                let expected = has_horizontal_crossing(&grid, &w);
                for tree in &trees {
                    let run = tree.run_configuration(&w).unwrap();
                    assert_eq!(
                        run.decision,
                        expected,
                        "r={r} anchor={} w={w}",
                        tree.anchor()
                    );
                }
            }
        }
    }

    #[test]
    fn decision_matches_oracle_on_sampled_half_density_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for r in [6usize, 8, 12] {
            let grid = TriangularBox::new(r).unwrap();
            let n = grid.vertex_count();
            let measure = KOutOfN::new(n, n / 2).unwrap();
            let trees = all_anchors(&grid);
            let mut recorder = RevealRecorder::new(n);
            for _ in 0..400 {
                let w = measure.sample(&mut rng);
                let occupied: Vec<bool> = (0..n).map(|v| w.get(v)).collect();
                let expected = has_horizontal_crossing(&grid, &w);
                for tree in &trees {
                    let decision = tree.run_on(&occupied, &mut recorder).unwrap();
                    assert_eq!(decision, expected, "r={r} anchor={}", tree.anchor());
                }
            }
        }
    }

    #[test]
    fn all_occupied_box_is_decided_true_with_few_reveals() {
        let grid = TriangularBox::new(5).unwrap();
        let w = Configuration::full(25);
        let tree = ExplorationTree::new(grid, grid.index(4, 2)).unwrap();
        let run = tree.run_configuration(&w).unwrap();
        assert!(run.decision);
        assert!(!run.revealed.is_empty());
        assert!(
            run.revealed.len() < 25,
            "interface should not reveal everything"
        );
    }

    #[test]
    fn successor_replay_reproduces_the_native_reveal_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let grid = TriangularBox::new(4).unwrap();
        let n = grid.vertex_count();
        let measure = KOutOfN::new(n, n / 2).unwrap();
        for anchor in grid.right_side() {
            let tree = ExplorationTree::new(grid, anchor).unwrap();
            for _ in 0..100 {
                let w = measure.sample(&mut rng);
                let run = tree.run_configuration(&w).unwrap();
                let mut history: Vec<(usize, bool)> = Vec::new();
                for (i, &v) in run.revealed.iter().enumerate() {
                    let predicted = if i == 0 {
                        tree.first()
                    } else {
                        tree.next(&history)
                    };
                    assert_eq!(predicted, v, "step {i}");
                    history.push((v, w.get(v)));
                }
            }
        }
    }

    #[test]
    fn first_query_is_the_anchor() {
        let grid = TriangularBox::new(6).unwrap();
        for anchor in grid.right_side() {
            let tree = ExplorationTree::new(grid, anchor).unwrap();
            assert_eq!(tree.first(), anchor);
        }
    }
}
