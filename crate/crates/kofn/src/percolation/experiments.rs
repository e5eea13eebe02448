use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::KOutOfN;
use crate::percolation::crossing::PivotalScratch;
use crate::percolation::{ExplorationTree, RevealRecorder, TriangularBox};
use crate::rngstream::{derive_seed, par_streams};
use crate::stats::{fit_line, LineFit};

/// A Monte Carlo scalar with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub samples: u64,
}

impl McEstimate {
    fn from_indicator(hits: u64, samples: u64) -> Self {
        let (mean, se) = crate::measures::indicator_mean_se(hits, samples);
        McEstimate { mean, se, samples }
    }

    fn from_sums(sum: f64, sumsq: f64, samples: u64) -> Self {
        let n = samples as f64;
        let mean = sum / n;
        let var = if samples > 1 {
            ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            se: (var / n).sqrt(),
            samples,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        McEstimate {
            mean: self.mean * factor,
            se: self.se * factor.abs(),
            samples: self.samples,
        }
    }
}

fn half_density(grid: &TriangularBox) -> Result<usize> {
    let n = grid.vertex_count();
    if n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "half density needs an even vertex count; R = {} gives {n}",
            grid.side()
        )));
    }
    Ok(n / 2)
}

/// Monte Carlo crossing probability under `P_{k, R^2}`.
pub fn crossing_probability_mc(
    r: usize,
    k: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<McEstimate> {
    let grid = TriangularBox::new(r)?;
    let measure = KOutOfN::new(grid.vertex_count(), k)?;
    let partials: Vec<u64> = par_streams(seed, streams, samples, |_, count, rng| {
        let mut scratch = PivotalScratch::new(&grid);
        let mut ones = Vec::with_capacity(k);
        let mut hits = 0u64;
        for _ in 0..count {
            measure.sample_ones_into(&mut ones, rng);
            scratch.load_ones(&ones);
            if scratch.crossing(&grid) {
                hits += 1;
            }
        }
        hits
    });
    Ok(McEstimate::from_indicator(partials.iter().sum(), samples))
}

/// Monte Carlo mean of the 0-pivotal count under `P_{k, R^2}`.
pub fn expected_zero_pivotal(
    r: usize,
    k: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<McEstimate> {
    let grid = TriangularBox::new(r)?;
    let measure = KOutOfN::new(grid.vertex_count(), k)?;
    let partials: Vec<(u64, u64)> = par_streams(seed, streams, samples, |_, count, rng| {
        let mut scratch = PivotalScratch::new(&grid);
        let mut ones = Vec::with_capacity(k);
        let mut sum = 0u64;
        let mut sumsq = 0u64;
        for _ in 0..count {
            measure.sample_ones_into(&mut ones, rng);
            scratch.load_ones(&ones);
            let c = scratch.count_zero_pivotal(&grid, None) as u64;
            sum += c;
            sumsq += c * c;
        }
        (sum, sumsq)
    });
    let (sum, sumsq) = partials
        .iter()
        .fold((0u64, 0u64), |(a, b), &(s, q)| (a + s, b + q));
    Ok(McEstimate::from_sums(sum as f64, sumsq as f64, samples))
}

/// The density increment of the crossing probability, scaled by the vertex
/// count, computed through the pivotal identity: at half density the result
/// is exactly twice the expected 0-pivotal count.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteDerivativeReport {
    pub r: usize,
    pub k: usize,
    pub expected_pivotal: McEstimate,
    pub derivative: McEstimate,
}

pub fn discrete_derivative(
    r: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<DiscreteDerivativeReport> {
    let grid = TriangularBox::new(r)?;
    let n = grid.vertex_count();
    let k = half_density(&grid)?;
    let expected = expected_zero_pivotal(r, k, samples, seed, streams)?;
    let factor = n as f64 / (n - k) as f64;
    Ok(DiscreteDerivativeReport {
        r,
        k,
        expected_pivotal: expected,
        derivative: expected.scaled(factor),
    })
}

/// Direct two-measure estimator of the same derivative, for cross-checking:
/// independent crossing estimates at `k` and `k + 1` scaled by `R^2`.
pub fn discrete_derivative_direct(
    r: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<McEstimate> {
    let grid = TriangularBox::new(r)?;
    let n = grid.vertex_count();
    let k = half_density(&grid)?;
    let low = crossing_probability_mc(r, k, samples, derive_seed(seed, 1), streams)?;
    let high = crossing_probability_mc(r, k + 1, samples, derive_seed(seed, 2), streams)?;
    Ok(McEstimate {
        mean: (high.mean - low.mean) * n as f64,
        se: (high.se.powi(2) + low.se.powi(2)).sqrt() * n as f64,
        samples,
    })
}

/// Expected 0-pivotal counts across a list of box sides, with the power-law
/// diagnostics: a log-log least-squares fit and the pairwise separations.
#[derive(Debug, Clone, Serialize)]
pub struct PivotalScalingRow {
    pub r: usize,
    pub k: usize,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone)]
pub struct PivotalScalingReport {
    pub rows: Vec<PivotalScalingRow>,
    pub fit: LineFit,
    /// Gap between consecutive rows in combined standard errors.
    pub consecutive_sigmas: Vec<f64>,
}

pub fn pivotal_scaling_experiment(
    r_list: &[usize],
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<PivotalScalingReport> {
    if r_list.len() < 3 {
        return Err(Error::InvalidParameter(
            "the scaling fit needs at least three box sides".into(),
        ));
    }
    let mut rows = Vec::with_capacity(r_list.len());
    for (i, &r) in r_list.iter().enumerate() {
        let grid = TriangularBox::new(r)?;
        let k = half_density(&grid)?;
        let estimate = expected_zero_pivotal(r, k, samples, derive_seed(seed, i as u64), streams)?;
        rows.push(PivotalScalingRow { r, k, estimate });
    }
    let xs: Vec<f64> = rows.iter().map(|row| (row.r as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|row| row.estimate.mean.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let consecutive_sigmas = rows
        .windows(2)
        .map(|pair| {
            let gap = pair[1].estimate.mean - pair[0].estimate.mean;
            let spread = (pair[0].estimate.se.powi(2) + pair[1].estimate.se.powi(2)).sqrt();
            gap / spread.max(1e-300)
        })
        .collect();
    Ok(PivotalScalingReport {
        rows,
        fit,
        consecutive_sigmas,
    })
}

/// Per-vertex revealment probabilities averaged over all right-side anchors,
/// at half density.
#[derive(Debug, Clone, Serialize)]
pub struct RevealmentProfile {
    pub r: usize,
    pub samples: u64,
    /// Average over anchors of the per-anchor revealment, per vertex.
    pub averaged: Vec<f64>,
    pub averaged_se: Vec<f64>,
    pub max_averaged: f64,
    pub max_vertex: usize,
    pub max_se: f64,
    /// Anchors used, in row order.
    pub anchors: Vec<usize>,
    /// Per-anchor revealment probability per vertex, aligned with `anchors`.
    pub per_anchor: Vec<Vec<f64>>,
}

pub fn revealment_profile(
    r: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<RevealmentProfile> {
    revealment_profile_with_step(r, samples, seed, streams, 1)
}

/// Like [`revealment_profile`], but using only every `anchor_step`-th anchor;
/// subsampling keeps large boxes affordable.
pub fn revealment_profile_with_step(
    r: usize,
    samples: u64,
    seed: u64,
    streams: u64,
    anchor_step: usize,
) -> Result<RevealmentProfile> {
    if anchor_step == 0 {
        return Err(Error::InvalidParameter(
            "anchor step must be positive".into(),
        ));
    }
    let grid = TriangularBox::new(r)?;
    let n = grid.vertex_count();
    let k = half_density(&grid)?;
    let measure = KOutOfN::new(n, k)?;
    let anchors: Vec<usize> = grid.right_side().step_by(anchor_step).collect();
    let trees: Vec<ExplorationTree> = anchors
        .iter()
        .map(|&anchor| ExplorationTree::new(grid, anchor))
        .collect::<Result<_>>()?;

    struct Partial {
        anchor_hits: Vec<Vec<u64>>,
        sum_x: Vec<f64>,
        sumsq_x: Vec<f64>,
    }
    let partials: Vec<Result<Partial>> = par_streams(seed, streams, samples, |_, count, rng| {
        let mut recorder = RevealRecorder::new(n);
        let mut anchor_hits = vec![vec![0u64; n]; trees.len()];
        let mut sum_x = vec![0.0f64; n];
        let mut sumsq_x = vec![0.0f64; n];
        let mut occupied = vec![false; n];
        let mut ones = Vec::with_capacity(k);
        let mut touch_count = vec![0u16; n];
        let mut touched: Vec<usize> = Vec::with_capacity(n);
        for _ in 0..count {
            measure.sample_ones_into(&mut ones, rng);
            occupied.fill(false);
            for &v in &ones {
                occupied[v] = true;
            }
            for v in touched.drain(..) {
                touch_count[v] = 0;
            }
            for (a, tree) in trees.iter().enumerate() {
                tree.run_on(&occupied, &mut recorder)?;
                for &v in &recorder.order {
                    anchor_hits[a][v] += 1;
                    if touch_count[v] == 0 {
                        touched.push(v);
                    }
                    touch_count[v] += 1;
                }
            }
            for &v in &touched {
                let x = f64::from(touch_count[v]) / trees.len() as f64;
                sum_x[v] += x;
                sumsq_x[v] += x * x;
            }
        }
        Ok(Partial {
            anchor_hits,
            sum_x,
            sumsq_x,
        })
    });

    let mut anchor_hits = vec![vec![0u64; n]; trees.len()];
    let mut sum_x = vec![0.0f64; n];
    let mut sumsq_x = vec![0.0f64; n];
    for partial in partials {
        let p = partial?;
        for (acc, part) in anchor_hits.iter_mut().zip(&p.anchor_hits) {
            for (a, b) in acc.iter_mut().zip(part) {
                *a += b;
            }
        }
        for (a, b) in sum_x.iter_mut().zip(&p.sum_x) {
            *a += b;
        }
        for (a, b) in sumsq_x.iter_mut().zip(&p.sumsq_x) {
            *a += b;
        }
    }

    let mut averaged = Vec::with_capacity(n);
    let mut averaged_se = Vec::with_capacity(n);
    for v in 0..n {
        let est = McEstimate::from_sums(sum_x[v], sumsq_x[v], samples);
        averaged.push(est.mean);
        averaged_se.push(est.se);
    }
    let (max_vertex, max_averaged) =
        averaged
            .iter()
            .enumerate()
            .map(|(v, &m)| (v, m))
            .fold((0usize, f64::MIN), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            });
    let per_anchor: Vec<Vec<f64>> = anchor_hits
        .iter()
        .map(|hits| hits.iter().map(|&h| h as f64 / samples as f64).collect())
        .collect();
    let max_se = averaged_se[max_vertex];
    Ok(RevealmentProfile {
        r,
        samples,
        averaged,
        averaged_se,
        max_averaged,
        max_vertex,
        max_se,
        anchors,
        per_anchor,
    })
}

/// One-arm probabilities from the center of a `(2M+1) x (2M+1)` box: an
/// occupied path from the center to graph distance `M`, under independent
/// half-density and under a fixed count of `ceil(n/2)` occupied vertices
/// (the vertex count is odd). The fixed-count probability can be at most
/// twice the independent one for any increasing event; the report checks that
/// direction within Monte Carlo error.
#[derive(Debug, Clone, Serialize)]
pub struct OneArmReport {
    pub radius: usize,
    pub box_side: usize,
    pub k: usize,
    pub bernoulli: McEstimate,
    pub fixed_k: McEstimate,
    pub direction_margin_sigmas: f64,
    pub pass_direction: bool,
}

pub fn one_arm_estimate(
    radius: usize,
    samples: u64,
    seed: u64,
    streams: u64,
) -> Result<OneArmReport> {
    if radius == 0 {
        return Err(Error::InvalidParameter("radius must be at least 1".into()));
    }
    let side = 2 * radius + 1;
    let grid = TriangularBox::new(side)?;
    let n = grid.vertex_count();
    let origin = grid.index(radius, radius);
    let dist = grid.distances_from(origin);
    let k = n.div_ceil(2);
    let measure = KOutOfN::new(n, k)?;

    // Occupied cluster of the center reaching graph distance `radius`.
    let reaches = |occupied: &[bool], stack: &mut Vec<usize>, seen: &mut [bool]| -> bool {
        if !occupied[origin] {
            return false;
        }
        seen.fill(false);
        stack.clear();
        stack.push(origin);
        seen[origin] = true;
        while let Some(v) = stack.pop() {
            if dist[v] as usize >= radius {
                return true;
            }
            for w in grid.neighbors(v) {
                if occupied[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    };

    let bern_partials: Vec<u64> =
        par_streams(derive_seed(seed, 1), streams, samples, |_, count, rng| {
            let mut occupied = vec![false; n];
            let mut stack = Vec::new();
            let mut seen = vec![false; n];
            let mut hits = 0u64;
            for _ in 0..count {
                for cell in occupied.iter_mut() {
                    *cell = rng.gen::<bool>();
                }
                if reaches(&occupied, &mut stack, &mut seen) {
                    hits += 1;
                }
            }
            hits
        });
    let fixed_partials: Vec<u64> =
        par_streams(derive_seed(seed, 2), streams, samples, |_, count, rng| {
            let mut occupied = vec![false; n];
            let mut ones = Vec::with_capacity(k);
            let mut stack = Vec::new();
            let mut seen = vec![false; n];
            let mut hits = 0u64;
            for _ in 0..count {
                measure.sample_ones_into(&mut ones, rng);
                occupied.fill(false);
                for &v in &ones {
                    occupied[v] = true;
                }
                if reaches(&occupied, &mut stack, &mut seen) {
                    hits += 1;
                }
            }
            hits
        });

    let bernoulli = McEstimate::from_indicator(bern_partials.iter().sum(), samples);
    let fixed_k = McEstimate::from_indicator(fixed_partials.iter().sum(), samples);
    let margin = 2.0 * bernoulli.mean - fixed_k.mean;
    let spread = (fixed_k.se.powi(2) + 4.0 * bernoulli.se.powi(2)).sqrt();
    let direction_margin_sigmas = margin / spread.max(1e-300);
    Ok(OneArmReport {
        radius,
        box_side: side,
        k,
        bernoulli,
        fixed_k,
        direction_margin_sigmas,
        pass_direction: direction_margin_sigmas >= -4.0,
    })
}

/// The anchor-averaged inequality check at half density: per-vertex
/// influences from one stream, per-anchor revealments from another, and the
/// inequality `1/4 = lhs <= C * bracket` tested for every anchor with a
/// Monte Carlo margin.
#[derive(Debug, Clone, Serialize)]
pub struct AnchorCheck {
    pub anchor: usize,
    pub weighted_term: f64,
    pub average_term: f64,
    pub bracket: f64,
    pub bracket_se: f64,
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragedOsssReport {
    pub r: usize,
    pub k: usize,
    pub samples: u64,
    pub constant: f64,
    pub lhs: f64,
    pub lhs_se: f64,
    pub total_influence: f64,
    pub anchors: Vec<AnchorCheck>,
    pub averaged_bracket: f64,
    pub all_hold: bool,
}

pub fn osss_averaged_bound_check(
    r: usize,
    samples: u64,
    seed: u64,
    streams: u64,
    constant: f64,
) -> Result<AveragedOsssReport> {
    let grid = TriangularBox::new(r)?;
    let n = grid.vertex_count();
    let k = half_density(&grid)?;
    let measure = KOutOfN::new(n, k)?;

    // Stream group one: crossing indicator and per-vertex 0-pivotal counts.
    let influence_partials: Vec<(u64, Vec<u64>)> =
        par_streams(derive_seed(seed, 1), streams, samples, |_, count, rng| {
            let mut scratch = PivotalScratch::new(&grid);
            let mut ones = Vec::with_capacity(k);
            let mut marks = Vec::new();
            let mut member_hits = 0u64;
            let mut pivotal_hits = vec![0u64; n];
            for _ in 0..count {
                measure.sample_ones_into(&mut ones, rng);
                scratch.load_ones(&ones);
                let (crossing, _) = scratch.analyze(&grid, Some(&mut marks));
                if crossing {
                    member_hits += 1;
                }
                for &v in &marks {
                    pivotal_hits[v] += 1;
                }
            }
            (member_hits, pivotal_hits)
        });
    let mut member_hits = 0u64;
    let mut pivotal_hits = vec![0u64; n];
    for (m, hits) in influence_partials {
        member_hits += m;
        for (a, b) in pivotal_hits.iter_mut().zip(&hits) {
            *a += b;
        }
    }
    let (p_event, p_se) = crate::measures::indicator_mean_se(member_hits, samples);
    let influences: Vec<(f64, f64)> = pivotal_hits
        .iter()
        .map(|&h| crate::measures::indicator_mean_se(h, samples))
        .collect();
    let total_influence: f64 = influences.iter().map(|&(i, _)| i).sum();
    let lhs = p_event * (1.0 - p_event);
    let lhs_se = (1.0 - 2.0 * p_event).abs() * p_se;

    // Stream group two: the revealment profile for the same boxes.
    let profile = revealment_profile(r, samples, derive_seed(seed, 2), streams)?;

    let mut anchors = Vec::with_capacity(profile.per_anchor.len());
    for (a, delta) in profile.per_anchor.iter().enumerate() {
        let average: f64 = delta.iter().sum::<f64>() / n as f64;
        let weighted_term: f64 = influences
            .iter()
            .zip(delta)
            .map(|(&(i, _), &d)| i * d)
            .sum();
        let average_term = total_influence * average;
        let bracket = weighted_term + average_term;
        let mut var = 0.0;
        for (e, &(i, i_se)) in influences.iter().enumerate() {
            var += ((delta[e] + average) * i_se).powi(2);
            // Revealment indicators: binomial error bound per vertex.
            let d_se = (delta[e] * (1.0 - delta[e]) / samples as f64).sqrt();
            var += (i * d_se).powi(2);
        }
        let bracket_se = var.sqrt();
        let slack = 4.0 * (lhs_se.powi(2) + (constant * bracket_se).powi(2)).sqrt();
        let holds = lhs <= constant * bracket + slack;
        let anchor = profile.anchors[a];
        anchors.push(AnchorCheck {
            anchor,
            weighted_term,
            average_term,
            bracket,
            bracket_se,
            ratio: if bracket > 0.0 {
                lhs / bracket
            } else {
                f64::INFINITY
            },
            holds,
        });
    }
    let averaged_bracket = anchors.iter().map(|c| c.bracket).sum::<f64>() / anchors.len() as f64;
    let all_hold = anchors.iter().all(|c| c.holds);
    Ok(AveragedOsssReport {
        r,
        k,
        samples,
        constant,
        lhs,
        lhs_se,
        total_influence,
        anchors,
        averaged_bracket,
        all_hold,
    })
}
