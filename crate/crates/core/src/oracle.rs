//! Brute-force reference implementations used to cross-check the closed
//! forms. Deliberately naive and independent of `pareto`/`gaps` internals.

use crate::error::{Error, Result};
use crate::tensor::{ArmMeansTensor, EfficiencyMatrix};

/// Pairwise scan: `i` is kept unless some `j` beats `R_i + eps` strictly in
/// every coordinate.
pub fn brute_pareto(r: &EfficiencyMatrix, epsilon: f64) -> Vec<usize> {
    let n = r.n_groups();
    let mut out = Vec::new();
    for i in 0..n {
        let mut dominated = false;
        for j in 0..n {
            let mut all_less = true;
            for d in 0..r.n_dims() {
                if !(r.row(i)[d] + epsilon < r.row(j)[d]) {
                    all_less = false;
                    break;
                }
            }
            if all_less {
                dominated = true;
                break;
            }
        }
        if !dominated {
            out.push(i);
        }
    }
    out
}

/// What the bisection oracle searches for.
#[derive(Debug, Clone, Copy)]
pub enum GapQuery<'a> {
    /// Smallest uniform addition to row `group` that puts it in the Pareto set.
    GroupParetoGap { matrix: &'a EfficiencyMatrix, group: usize },
    /// For a group other than the weighted best: smallest uniform addition to
    /// arm `(group, arm)` after which the group's weighted efficiency exceeds
    /// the best one. For the best group: smallest addition after which the
    /// arm is no longer strictly dominated by its group's efficiency vector.
    ArmAlpha {
        tensor: &'a ArmMeansTensor,
        weights: &'a [f64],
        group: usize,
        arm: usize,
    },
}

fn row_plus(matrix: &EfficiencyMatrix, group: usize, alpha: f64) -> EfficiencyMatrix {
    let mut rows = matrix.to_rows();
    for x in &mut rows[group] {
        *x += alpha;
    }
    EfficiencyMatrix::from_rows(&rows).expect("finite rows")
}

fn group_efficiency(tensor: &ArmMeansTensor, group: usize, bumped: Option<(usize, f64)>) -> Vec<f64> {
    let mut best = vec![f64::NEG_INFINITY; tensor.n_dims()];
    for j in 0..tensor.n_arms() {
        for d in 0..tensor.n_dims() {
            let mut m = tensor.mean(group, j, d);
            if let Some((arm, alpha)) = bumped {
                if arm == j {
                    m += alpha;
                }
            }
            if m > best[d] {
                best[d] = m;
            }
        }
    }
    best
}

fn weighted(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

impl GapQuery<'_> {
    /// The defining predicate at addition `alpha`.
    pub fn holds(&self, alpha: f64) -> bool {
        match *self {
            GapQuery::GroupParetoGap { matrix, group } => brute_pareto(&row_plus(matrix, group, alpha), 0.0).contains(&group),
            GapQuery::ArmAlpha {
                tensor,
                weights,
                group,
                arm,
            } => {
                let scores: Vec<f64> = (0..tensor.n_groups())
                    .map(|i| weighted(&group_efficiency(tensor, i, None), weights))
                    .collect();
                let mut best = 0;
                for i in 1..scores.len() {
                    if scores[i] > scores[best] {
                        best = i;
                    }
                }
                if group == best {
                    let r = group_efficiency(tensor, group, None);
                    !(0..tensor.n_dims()).all(|d| tensor.mean(group, arm, d) + alpha < r[d])
                } else {
                    weighted(&group_efficiency(tensor, group, Some((arm, alpha))), weights) > scores[best]
                }
            }
        }
    }
}

/// Bisection over `[0, 2]` for the smallest `alpha` at which the query's
/// predicate holds, to within `tolerance`. Returns 0 when it already holds.
pub fn gap_bisection_oracle(query: GapQuery<'_>, tolerance: f64) -> Result<f64> {
    if !(tolerance > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tolerance}")));
    }
    if query.holds(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 2.0);
    if !query.holds(hi) {
        return Err(Error::NoThreshold { lo, hi });
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if query.holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
