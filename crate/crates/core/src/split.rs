//! Split-trial machinery: candidate split points, partition deduction from
//! sketches, the reorganized gini criterion and the Hoeffding test.

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, Slot};
use crate::element::{LeafElement, NumericSketch};
use crate::error::{Error, Result};
use crate::sketch::QuantileSet;

/// Gains at or below this are treated as no-op splits.
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    /// Samples a leaf must see between split trials.
    pub n_min: u64,
    /// Candidate split points per numeric attribute.
    pub split_points: usize,
    pub tau: f64,
    pub delta: f64,
    /// Range of the split measure in the Hoeffding bound.
    pub r: f64,
    pub lambda: f64,
    pub quantiles: usize,
    pub max_depth: usize,
    pub max_leaves: usize,
    pub elements: usize,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            n_min: 200,
            split_points: 10,
            tau: 0.05,
            delta: 1e-3,
            r: 1.0,
            lambda: 0.01,
            quantiles: 8,
            max_depth: 15,
            max_leaves: 1024,
            elements: 1024,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_min == 0 {
            return bad("n_min must be positive".into());
        }
        if self.split_points == 0 {
            return bad("split point count must be positive".into());
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad(format!("tau must lie in (0, 1), got {}", self.tau));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.r > 0.0) || !(self.lambda > 0.0) {
            return bad("R and lambda must be positive".into());
        }
        if self.quantiles < 2 {
            return bad(format!("quantile count must be at least 2, got {}", self.quantiles));
        }
        if self.max_depth == 0 || self.max_leaves == 0 || self.elements == 0 {
            return bad("depth, leaf and element limits must be positive".into());
        }
        Ok(())
    }
}

/// `P` evenly spaced interior points of `[min, max]`.
pub fn gen_split_points(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = (max - min) / (count + 1) as f64;
    (1..=count).map(|p| step * p as f64 + min).collect()
}

/// Class masses on each side of one split point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl PartitionRow {
    fn from_fractions(fractions: impl Iterator<Item = f64>, class_counts: &[u64]) -> Self {
        let (left, right) = fractions
            .zip(class_counts)
            .map(|(f, &n)| {
                let n = n as f64;
                let l = f * n;
                (l, n - l)
            })
            .unzip();
        PartitionRow { left, right }
    }
}

/// Partition from per-class quantile sets: class `j` sends
/// `count_below(pt) / (Q+1)` of its mass to the left.
pub fn deduce_partition(rows: &[Option<QuantileSet>], class_counts: &[u64], pt: f64) -> PartitionRow {
    PartitionRow::from_fractions(
        rows.iter()
            .map(|r| r.as_ref().map_or(0.0, |q| q.left_fraction(pt))),
        class_counts,
    )
}

/// Same as [`deduce_partition`] for either sketch kind; a Gaussian sketch
/// contributes `Φ_j(pt)` of class `j`.
pub fn deduce_partition_sketch(
    rows: &[Option<NumericSketch>],
    class_counts: &[u64],
    pt: f64,
) -> PartitionRow {
    PartitionRow::from_fractions(
        rows.iter()
            .map(|r| r.as_ref().map_or(0.0, |s| s.left_fraction(pt))),
        class_counts,
    )
}

pub fn gini(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

fn square_sum_over_size(side: &[f64]) -> f64 {
    let size: f64 = side.iter().sum();
    if size <= 0.0 {
        0.0
    } else {
        side.iter().map(|c| c * c).sum::<f64>() / size
    }
}

/// `Σ L_j²/|L| + Σ R_j²/|R|`. `None` when both sides are empty.
pub fn split_quality(left: &[f64], right: &[f64]) -> Option<f64> {
    let total: f64 = left.iter().chain(right).sum();
    if total <= 0.0 {
        return None;
    }
    Some(square_sum_over_size(left) + square_sum_over_size(right))
}

/// Gini reduction computed directly from the three impurities.
pub fn gini_gain(left: &[f64], right: &[f64]) -> f64 {
    let parent: Vec<f64> = left.iter().zip(right).map(|(l, r)| l + r).collect();
    let n: f64 = parent.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    let nl: f64 = left.iter().sum();
    let nr: f64 = right.iter().sum();
    gini(&parent) - nl / n * gini(left) - nr / n * gini(right)
}

/// Gini reduction recovered from a split quality: `quality/|S| + gini(S) - 1`.
pub fn gain_from_quality(quality: f64, parent: &[f64]) -> f64 {
    let n: f64 = parent.iter().sum();
    quality / n + gini(parent) - 1.0
}

/// `ε = sqrt(R² ln(1/δ) / 2n)`.
pub fn hoeffding_bound(r: f64, delta: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Model("Hoeffding bound needs at least one observation".into()));
    }
    Ok((r * r * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SplitTest {
    /// `x ≤ threshold` goes left.
    Threshold(f64),
    /// `x == value` goes left.
    Equals(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub attribute: usize,
    pub test: SplitTest,
    pub quality: f64,
    pub partition: PartitionRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitReason {
    /// Best beat the runner-up by more than ε.
    Bound,
    /// Runner-up within ε but ε < τ.
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Split(SplitReason),
    NoSplit,
}

impl Decision {
    pub fn is_split(self) -> bool {
        matches!(self, Decision::Split(_))
    }
}

/// Apply the Hoeffding test to the best and runner-up split qualities.
///
/// Without a runner-up the best is compared against the null split (G = 0).
pub fn decide_split(
    best_quality: f64,
    second_quality: Option<f64>,
    class_counts: &[f64],
    hp: &HyperParams,
) -> Result<(Decision, f64, f64)> {
    let n: f64 = class_counts.iter().sum();
    let eps = hoeffding_bound(hp.r, hp.delta, n as u64)?;
    let g_best = gain_from_quality(best_quality, class_counts);
    let delta_g = match second_quality {
        Some(q2) => (best_quality - q2) / n,
        None => g_best,
    };
    let decision = if g_best <= MIN_GAIN {
        Decision::NoSplit
    } else if delta_g > eps {
        Decision::Split(SplitReason::Bound)
    } else if delta_g < eps && eps < hp.tau {
        Decision::Split(SplitReason::Tie)
    } else {
        Decision::NoSplit
    };
    Ok((decision, delta_g, eps))
}

/// Order per-attribute best candidates: quality descending, then lower
/// attribute index.
pub fn rank_candidates(candidates: &mut [SplitCandidate]) {
    candidates.sort_by(|a, b| {
        b.quality
            .total_cmp(&a.quality)
            .then(a.attribute.cmp(&b.attribute))
    });
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub decision: Decision,
    pub best: Option<SplitCandidate>,
    pub gain: f64,
    pub delta_gain: f64,
    pub epsilon: f64,
}

impl TrialOutcome {
    fn no_split() -> Self {
        TrialOutcome {
            decision: Decision::NoSplit,
            best: None,
            gain: 0.0,
            delta_gain: 0.0,
            epsilon: f64::INFINITY,
        }
    }
}

fn keep_better(best: &mut Option<SplitCandidate>, cand: SplitCandidate) {
    if best.as_ref().is_none_or(|b| cand.quality > b.quality) {
        *best = Some(cand);
    }
}

/// Best candidate of every attribute that has one, in attribute order.
pub fn attribute_candidates(element: &LeafElement, schema: &DatasetSchema, hp: &HyperParams) -> Vec<SplitCandidate> {
    let counts = element.class_counts();
    let mut out = Vec::with_capacity(schema.attribute_count());
    for attribute in 0..schema.attribute_count() {
        let mut best = None;
        match schema.slot(attribute) {
            Slot::Numeric(k) => {
                let Some((min, max)) = element.range(k) else { continue };
                if max <= min {
                    continue;
                }
                let row = element.sketch_row(k);
                for pt in gen_split_points(min, max, hp.split_points) {
                    let partition = deduce_partition_sketch(row, counts, pt);
                    if let Some(quality) = split_quality(&partition.left, &partition.right) {
                        keep_better(
                            &mut best,
                            SplitCandidate {
                                attribute,
                                test: SplitTest::Threshold(pt),
                                quality,
                                partition,
                            },
                        );
                    }
                }
            }
            Slot::Categorical(k) => {
                let h = element.histogram(k);
                for v in 0..h.value_count() {
                    let left: Vec<f64> = h.row(v).into_iter().map(|c| c as f64).collect();
                    let right = counts
                        .iter()
                        .zip(&left)
                        .map(|(&n, l)| n as f64 - l)
                        .collect::<Vec<_>>();
                    if let Some(quality) = split_quality(&left, &right) {
                        keep_better(
                            &mut best,
                            SplitCandidate {
                                attribute,
                                test: SplitTest::Equals(v as u32),
                                quality,
                                partition: PartitionRow { left, right },
                            },
                        );
                    }
                }
            }
        }
        out.extend(best);
    }
    out
}

/// Score all candidate splits of a leaf and apply the Hoeffding test. Resets
/// the element's trial counter.
pub fn run_split_trial(element: &mut LeafElement, schema: &DatasetSchema, hp: &HyperParams) -> Result<TrialOutcome> {
    element.reset_trial_counter();
    if element.n_f() < 2 {
        return Ok(TrialOutcome::no_split());
    }
    let mut candidates = attribute_candidates(element, schema, hp);
    if candidates.is_empty() {
        return Ok(TrialOutcome::no_split());
    }
    rank_candidates(&mut candidates);
    let parent: Vec<f64> = element.class_counts().iter().map(|&c| c as f64).collect();
    let second = candidates.get(1).map(|c| c.quality);
    let best = candidates.swap_remove(0);
    let (decision, delta_gain, epsilon) = decide_split(best.quality, second, &parent, hp)?;
    Ok(TrialOutcome {
        decision,
        gain: gain_from_quality(best.quality, &parent),
        best: Some(best),
        delta_gain,
        epsilon,
    })
}
