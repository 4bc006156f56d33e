//! Instance-dependent hardness quantities for both identification problems.
//!
//! Minimisations over empty sets evaluate to `f64::INFINITY` and are stored
//! as such (for example every gap of a single-group instance).

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::pareto::pareto_mask;
use crate::tensor::{efficiency, ArmMeansTensor, EfficiencyMatrix};
use crate::vector::{big_m_gap_unchecked, m_gap_unchecked};

/// Gaps of the Pareto-set problem. Group-indexed vectors have length N,
/// arm-indexed ones are row-major N×K.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpsiGapReport {
    pub epsilon: f64,
    pub n_groups: usize,
    pub n_arms: usize,
    pub pareto_set: Vec<usize>,
    pub group_gaps: Vec<f64>,
    /// Indexed by group; `None` for groups outside the Pareto set.
    pub plus_gaps: Vec<Option<f64>>,
    pub minus_gaps: Vec<Option<f64>>,
    pub arm_gaps: Vec<f64>,
    pub effective_gaps: Vec<f64>,
}

impl GpsiGapReport {
    pub fn arm_gap(&self, group: usize, arm: usize) -> f64 {
        self.arm_gaps[group * self.n_arms + arm]
    }

    pub fn effective_gap(&self, group: usize, arm: usize) -> f64 {
        self.effective_gaps[group * self.n_arms + arm]
    }

    pub fn min_group_gap(&self) -> f64 {
        self.group_gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn gpsi_gaps(tensor: &ArmMeansTensor, epsilon: f64) -> Result<GpsiGapReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let r = efficiency(tensor);
    let (n, k) = (tensor.n_groups(), tensor.n_arms());
    let optimal = pareto_mask(&r);

    let mut group_gaps = vec![0.0; n];
    for i in (0..n).filter(|&i| !optimal[i]) {
        group_gaps[i] = (0..n)
            .filter(|&j| optimal[j])
            .map(|j| m_gap_unchecked(r.row(i), r.row(j)))
            .fold(0.0, f64::max);
    }

    let mut plus_gaps = vec![None; n];
    let mut minus_gaps = vec![None; n];
    for i in (0..n).filter(|&i| optimal[i]) {
        let plus = (0..n)
            .filter(|&j| j != i && optimal[j])
            .map(|j| {
                big_m_gap_unchecked(r.row(i), r.row(j), 0.0)
                    .min(big_m_gap_unchecked(r.row(j), r.row(i), 0.0))
            })
            .fold(f64::INFINITY, f64::min);
        let minus = (0..n)
            .filter(|&j| !optimal[j])
            .map(|j| big_m_gap_unchecked(r.row(j), r.row(i), 0.0) + 2.0 * group_gaps[j])
            .fold(f64::INFINITY, f64::min);
        plus_gaps[i] = Some(plus);
        minus_gaps[i] = Some(minus);
        group_gaps[i] = plus.min(minus);
    }

    let mut arm_gaps = Vec::with_capacity(n * k);
    let mut effective_gaps = Vec::with_capacity(n * k);
    for i in 0..n {
        for j in 0..k {
            let g = m_gap_unchecked(tensor.arm(i, j), r.row(i));
            arm_gaps.push(g);
            effective_gaps.push(g.max(group_gaps[i]).max(epsilon));
        }
    }

    Ok(GpsiGapReport {
        epsilon,
        n_groups: n,
        n_arms: k,
        pareto_set: (0..n).filter(|&i| optimal[i]).collect(),
        group_gaps,
        plus_gaps,
        minus_gaps,
        arm_gaps,
        effective_gaps,
    })
}

/// Gaps of the weighted best-group problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbgiGapReport {
    pub weights: Vec<f64>,
    pub n_groups: usize,
    pub n_arms: usize,
    pub best_group: usize,
    pub group_gaps: Vec<f64>,
    pub arm_alphas: Vec<f64>,
    pub arm_gaps: Vec<f64>,
    pub refined_arm_gaps: Vec<f64>,
}

impl LbgiGapReport {
    pub fn arm_alpha(&self, group: usize, arm: usize) -> f64 {
        self.arm_alphas[group * self.n_arms + arm]
    }

    pub fn arm_gap(&self, group: usize, arm: usize) -> f64 {
        self.arm_gaps[group * self.n_arms + arm]
    }

    pub fn refined_arm_gap(&self, group: usize, arm: usize) -> f64 {
        self.refined_arm_gaps[group * self.n_arms + arm]
    }
}

pub(crate) fn validate_weights(weights: &[f64], n_dims: usize) -> Result<()> {
    check_len(n_dims, weights.len())?;
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::arg(format!("weights must be positive and finite, got {w}")));
    }
    Ok(())
}

/// Unique maximiser of `R_i · w`; exact ties are an error.
pub fn best_weighted_group(r: &EfficiencyMatrix, weights: &[f64]) -> Result<usize> {
    validate_weights(weights, r.n_dims())?;
    let scores = r.weighted_scores(weights);
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    if let Some(tie) = (0..scores.len()).find(|&i| i != best && scores[i] == scores[best]) {
        return Err(Error::NonUniqueOptimum {
            first: best.min(tie),
            second: best.max(tie),
            value: scores[best],
        });
    }
    Ok(best)
}

pub fn lbgi_gaps(tensor: &ArmMeansTensor, weights: &[f64]) -> Result<LbgiGapReport> {
    let r = efficiency(tensor);
    let best = best_weighted_group(&r, weights)?;
    let (n, k, dims) = (tensor.n_groups(), tensor.n_arms(), tensor.n_dims());
    let scores = r.weighted_scores(weights);
    let w_norm: f64 = weights.iter().sum();
    let target = scores[best];

    let mut group_gaps: Vec<f64> = scores.iter().map(|s| (target - s) / w_norm).collect();
    group_gaps[best] = (0..n)
        .filter(|&i| i != best)
        .map(|i| group_gaps[i])
        .fold(f64::INFINITY, f64::min);

    let mut arm_alphas = Vec::with_capacity(n * k);
    let mut arm_gaps = Vec::with_capacity(n * k);
    let mut refined = Vec::with_capacity(n * k);
    for i in 0..n {
        for j in 0..k {
            let alpha = if i == best {
                m_gap_unchecked(tensor.arm(i, j), r.row(i))
            } else {
                overtake_alpha(tensor, i, j, weights, target)
            };
            arm_alphas.push(alpha);
            arm_gaps.push(alpha.max(group_gaps[i]));
            let q = (0..dims)
                .map(|d| {
                    group_gaps[i] * w_norm / (dims as f64 * weights[d])
                        + (r.row(i)[d] - tensor.mean(i, j, d))
                })
                .fold(f64::INFINITY, f64::min);
            refined.push(q);
        }
    }

    Ok(LbgiGapReport {
        weights: weights.to_vec(),
        n_groups: n,
        n_arms: k,
        best_group: best,
        group_gaps,
        arm_alphas,
        arm_gaps,
        refined_arm_gaps: refined,
    })
}

/// Smallest uniform increase `alpha` of arm `(group, arm)` after which the
/// group's weighted efficiency exceeds `target`.
///
/// With `O_d` the best competing in-group mean, the weighted efficiency
/// `f(alpha) = sum_d w_d max(O_d, mu_d + alpha)` is piecewise linear and
/// non-decreasing; dimension `d` starts contributing slope `w_d` at the
/// breakpoint `O_d - mu_d`. Requires `f(0) < target`.
fn overtake_alpha(tensor: &ArmMeansTensor, group: usize, arm: usize, weights: &[f64], target: f64) -> f64 {
    let dims = tensor.n_dims();
    let mu = tensor.arm(group, arm);
    let others: Vec<f64> = (0..dims)
        .map(|d| {
            (0..tensor.n_arms())
                .filter(|&l| l != arm)
                .map(|l| tensor.mean(group, l, d))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let f = |alpha: f64| -> f64 {
        (0..dims)
            .map(|d| weights[d] * others[d].max(mu[d] + alpha))
            .sum()
    };

    let mut breaks: Vec<(f64, usize)> = (0..dims).map(|d| (others[d] - mu[d], d)).collect();
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut start = 0.0;
    let mut slope = 0.0;
    let mut next = 0;
    // Dimensions already tracking the arm at alpha = 0.
    while next < dims && breaks[next].0 <= 0.0 {
        slope += weights[breaks[next].1];
        next += 1;
    }
    loop {
        let value = f(start);
        if slope > 0.0 {
            let root = start + (target - value) / slope;
            if next == dims || root <= breaks[next].0 {
                return root.max(0.0);
            }
        }
        if next == dims {
            // Unreachable when dims >= 1: the final segment always has slope > 0.
            return f64::INFINITY;
        }
        start = breaks[next].0;
        while next < dims && breaks[next].0 <= start {
            slope += weights[breaks[next].1];
            next += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hard_defaults() -> ArmMeansTensor {
        ArmMeansTensor::from_nested(&[
            vec![vec![0.9, 0.7, 0.7]],
            vec![vec![0.7, 0.9, 0.7]],
            vec![vec![0.3, 0.3, 0.1]],
            vec![vec![0.3, 0.3, 0.1]],
        ])
        .unwrap()
    }

    #[test]
    fn hard_family_gpsi_gaps() {
        let g = gpsi_gaps(&hard_defaults(), 0.05).unwrap();
        assert_eq!(g.pareto_set, vec![0, 1]);
        // a1 - a2 = 0.2 and a2 - a4 = 0.4 up to double rounding.
        assert!((g.group_gaps[0] - 0.2).abs() < 1e-12);
        assert!((g.group_gaps[1] - 0.2).abs() < 1e-12);
        assert!((g.group_gaps[2] - 0.4).abs() < 1e-12);
        assert!((g.group_gaps[3] - 0.4).abs() < 1e-12);
        assert_eq!(g.group_gaps[0], g.plus_gaps[0].unwrap().min(g.minus_gaps[0].unwrap()));
        assert!(g.plus_gaps[2].is_none());
    }

    #[test]
    fn single_group_gaps_are_infinite() {
        let t = ArmMeansTensor::from_nested(&[vec![vec![0.4, 0.2], vec![0.1, 0.6]]]).unwrap();
        let g = gpsi_gaps(&t, 0.1).unwrap();
        assert_eq!(g.group_gaps, vec![f64::INFINITY]);
        assert_eq!(g.plus_gaps[0], Some(f64::INFINITY));
        assert_eq!(g.minus_gaps[0], Some(f64::INFINITY));
        assert!(g.effective_gaps.iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn effective_gaps_floor_at_epsilon() {
        let t = ArmMeansTensor::from_nested(&[
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.51, 0.49], vec![0.0, 0.0]],
        ])
        .unwrap();
        let g = gpsi_gaps(&t, 0.3).unwrap();
        for x in &g.effective_gaps {
            assert!(*x >= 0.3);
        }
        assert!(g.group_gaps.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn gpsi_rejects_non_positive_epsilon() {
        assert!(gpsi_gaps(&hard_defaults(), 0.0).is_err());
    }

    fn two_group() -> ArmMeansTensor {
        // R1 = (0.9, 0.5), R2 = (0.6, 0.6); group 2's second arm is (0.6, 0.4).
        ArmMeansTensor::from_nested(&[
            vec![vec![0.9, 0.5], vec![0.9, 0.5]],
            vec![vec![0.5, 0.6], vec![0.6, 0.4]],
        ])
        .unwrap()
    }

    /// Smallest alpha on a bisection bracket for which adding alpha to arm
    /// (i, j) makes group i's weighted efficiency exceed `target`.
    fn alpha_bisection(t: &ArmMeansTensor, i: usize, j: usize, w: &[f64], target: f64) -> f64 {
        let eval = |a: f64| -> f64 {
            (0..t.n_dims())
                .map(|d| {
                    let m = (0..t.n_arms())
                        .map(|l| t.mean(i, l, d) + if l == j { a } else { 0.0 })
                        .fold(f64::NEG_INFINITY, f64::max);
                    w[d] * m
                })
                .sum()
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eval(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn lbgi_two_group_example() {
        let t = two_group();
        let g = lbgi_gaps(&t, &[1.0, 1.0]).unwrap();
        assert_eq!(g.best_group, 0);
        // (1.4 - 1.2) / 2
        assert!((g.group_gaps[1] - 0.1).abs() < 1e-12);
        assert!((g.group_gaps[0] - 0.1).abs() < 1e-12);
        let oracle = alpha_bisection(&t, 1, 1, &[1.0, 1.0], 1.4);
        assert!((oracle - 0.2).abs() < 1e-9);
        assert!((g.arm_alpha(1, 1) - 0.2).abs() < 1e-12);
        assert!((g.arm_alpha(1, 0) - alpha_bisection(&t, 1, 0, &[1.0, 1.0], 1.4)).abs() < 1e-9);
        // Arms equal to the best group's efficiency vector need nothing.
        assert_eq!(g.arm_alpha(0, 0), 0.0);
        assert_eq!(g.arm_gap(0, 0), g.group_gaps[0]);
    }

    #[test]
    fn lbgi_refined_dominates_scaled_gap() {
        let t = two_group();
        let g = lbgi_gaps(&t, &[1.0, 2.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(g.refined_arm_gap(i, j) >= g.arm_gap(i, j) / 2.0 - 1e-12);
            }
        }
    }

    #[test]
    fn lbgi_alpha_multiple_breakpoints() {
        // Three dimensions with staggered competitor arms so the crossing
        // falls after two breakpoints.
        let t = ArmMeansTensor::from_nested(&[
            vec![vec![0.95, 0.95, 0.95]; 3],
            vec![vec![0.1, 0.2, 0.3], vec![0.4, 0.1, 0.0], vec![0.0, 0.5, 0.1]],
        ])
        .unwrap();
        let w = [1.0, 2.0, 0.5];
        let g = lbgi_gaps(&t, &w).unwrap();
        let target = 0.95 * 3.5;
        for j in 0..3 {
            let oracle = alpha_bisection(&t, 1, j, &w, target);
            assert!((g.arm_alpha(1, j) - oracle).abs() < 1e-9, "arm {j}: {} vs {oracle}", g.arm_alpha(1, j));
            assert!(g.arm_alpha(1, j) >= g.group_gaps[1] - 1e-12);
        }
    }

    #[test]
    fn lbgi_tie_is_rejected() {
        let t = ArmMeansTensor::from_nested(&[vec![vec![0.5, 0.6]], vec![vec![0.6, 0.5]]]).unwrap();
        assert!(matches!(
            lbgi_gaps(&t, &[1.0, 1.0]),
            Err(Error::NonUniqueOptimum { first: 0, second: 1, .. })
        ));
        assert!(lbgi_gaps(&t, &[1.0, 0.0]).is_err());
        assert!(lbgi_gaps(&t, &[1.0]).is_err());
    }

    #[test]
    fn lbgi_single_group() {
        let t = ArmMeansTensor::from_nested(&[vec![vec![0.5, 0.6], vec![0.2, 0.9]]]).unwrap();
        let g = lbgi_gaps(&t, &[1.0, 1.0]).unwrap();
        assert_eq!(g.best_group, 0);
        assert!(g.group_gaps[0].is_infinite());
    }
}
