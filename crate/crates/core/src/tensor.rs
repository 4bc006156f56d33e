use crate::error::{Error, Result};

/// Ground-truth arm means: N groups × K arms × D objectives, entries in [0, 1].
///
/// Stored row-major as `means[(i * K + j) * D + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmMeansTensor {
    n_groups: usize,
    n_arms: usize,
    n_dims: usize,
    means: Vec<f64>,
}

impl ArmMeansTensor {
    pub fn new(n_groups: usize, n_arms: usize, n_dims: usize, means: Vec<f64>) -> Result<Self> {
        if n_groups == 0 || n_arms == 0 || n_dims == 0 {
            return Err(Error::InvalidTensor(format!(
                "dimensions must be positive, got N={n_groups}, K={n_arms}, D={n_dims}"
            )));
        }
        let expected = n_groups * n_arms * n_dims;
        if means.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: means.len(),
            });
        }
        if let Some(pos) = means.iter().position(|m| !(0.0..=1.0).contains(m)) {
            let (i, j, d) = (pos / (n_arms * n_dims), (pos / n_dims) % n_arms, pos % n_dims);
            return Err(Error::InvalidTensor(format!(
                "mean of arm ({}, {}) in dimension {} is {}, outside [0, 1]",
                i + 1,
                j + 1,
                d + 1,
                means[pos]
            )));
        }
        Ok(ArmMeansTensor {
            n_groups,
            n_arms,
            n_dims,
            means,
        })
    }

    /// Builds a tensor from nested `[group][arm][dim]` vectors.
    pub fn from_nested(nested: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n_groups = nested.len();
        let n_arms = nested.first().map_or(0, Vec::len);
        let n_dims = nested
            .first()
            .and_then(|g| g.first())
            .map_or(0, Vec::len);
        let mut means = Vec::with_capacity(n_groups * n_arms * n_dims);
        for group in nested {
            if group.len() != n_arms {
                return Err(Error::DimensionMismatch {
                    expected: n_arms,
                    found: group.len(),
                });
            }
            for arm in group {
                if arm.len() != n_dims {
                    return Err(Error::DimensionMismatch {
                        expected: n_dims,
                        found: arm.len(),
                    });
                }
                means.extend_from_slice(arm);
            }
        }
        Self::new(n_groups, n_arms, n_dims, means)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n_groups)
            .map(|i| (0..self.n_arms).map(|j| self.arm(i, j).to_vec()).collect())
            .collect()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn n_arms_total(&self) -> usize {
        self.n_groups * self.n_arms
    }

    pub fn arm(&self, group: usize, arm: usize) -> &[f64] {
        let start = (group * self.n_arms + arm) * self.n_dims;
        &self.means[start..start + self.n_dims]
    }

    pub fn mean(&self, group: usize, arm: usize, dim: usize) -> f64 {
        self.means[(group * self.n_arms + arm) * self.n_dims + dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.means
    }

    pub(crate) fn check_indices(&self, group: usize, arm: usize) -> Result<()> {
        if group >= self.n_groups {
            return Err(Error::IndexOutOfRange {
                what: "group",
                index: group,
                len: self.n_groups,
            });
        }
        if arm >= self.n_arms {
            return Err(Error::IndexOutOfRange {
                what: "arm",
                index: arm,
                len: self.n_arms,
            });
        }
        Ok(())
    }

    /// In-group arm attaining the maximum of `dim`, smallest index on ties.
    pub fn best_arm(&self, group: usize, dim: usize) -> usize {
        let mut best = 0;
        for j in 1..self.n_arms {
            if self.mean(group, j, dim) > self.mean(group, best, dim) {
                best = j;
            }
        }
        best
    }
}

/// Group efficiency vectors, one row of length D per group.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyMatrix {
    n_dims: usize,
    values: Vec<f64>,
}

impl EfficiencyMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n_dims == 0 {
            return Err(Error::arg("efficiency matrix needs at least one non-empty row"));
        }
        let mut values = Vec::with_capacity(rows.len() * n_dims);
        for row in rows {
            if row.len() != n_dims {
                return Err(Error::DimensionMismatch {
                    expected: n_dims,
                    found: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::arg("efficiency entries must be finite"));
            }
            values.extend_from_slice(row);
        }
        Ok(EfficiencyMatrix { n_dims, values })
    }

    pub(crate) fn from_flat(n_dims: usize, values: Vec<f64>) -> Self {
        debug_assert!(n_dims > 0 && values.len().is_multiple_of(n_dims));
        EfficiencyMatrix { n_dims, values }
    }

    pub fn n_groups(&self) -> usize {
        self.values.len() / self.n_dims
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn row(&self, group: usize) -> &[f64] {
        &self.values[group * self.n_dims..(group + 1) * self.n_dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_dims)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Weighted sum `R_i · w` for every group.
    pub fn weighted_scores(&self, weights: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().zip(weights).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `R_i^d = max_j mu_{i,j}^d`.
pub fn efficiency(tensor: &ArmMeansTensor) -> EfficiencyMatrix {
    let (n, k, d) = (tensor.n_groups(), tensor.n_arms(), tensor.n_dims());
    let mut values = vec![f64::NEG_INFINITY; n * d];
    for i in 0..n {
        let row = &mut values[i * d..(i + 1) * d];
        for j in 0..k {
            for (r, &m) in row.iter_mut().zip(tensor.arm(i, j)) {
                if m > *r {
                    *r = m;
                }
            }
        }
    }
    EfficiencyMatrix::from_flat(d, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_out_of_range_means() {
        let err = ArmMeansTensor::new(1, 1, 2, vec![0.5, 1.2]).unwrap_err();
        assert!(err.to_string().contains("dimension 2"), "{err}");
        assert!(ArmMeansTensor::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(ArmMeansTensor::new(0, 1, 1, vec![]).is_err());
        assert!(ArmMeansTensor::new(1, 2, 1, vec![0.1]).is_err());
    }

    #[test]
    fn single_arm_efficiency_is_the_arm() {
        let t = ArmMeansTensor::new(2, 1, 3, vec![0.1, 0.2, 0.3, 0.9, 0.8, 0.7]).unwrap();
        let r = efficiency(&t);
        assert_eq!(r.row(0), &[0.1, 0.2, 0.3]);
        assert_eq!(r.row(1), &[0.9, 0.8, 0.7]);
    }

    #[test]
    fn two_arm_coordinatewise_max() {
        let t = ArmMeansTensor::from_nested(&[vec![vec![0.2, 0.9], vec![0.8, 0.1]]]).unwrap();
        assert_eq!(efficiency(&t).row(0), &[0.8, 0.9]);
    }

    #[test]
    fn efficiency_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let means: Vec<f64> = (0..24).map(|_| rng.random::<f64>()).collect();
            let t = ArmMeansTensor::new(3, 4, 2, means.clone()).unwrap();
            let r = efficiency(&t);
            for i in 0..3 {
                for d in 0..2 {
                    let mut best = means[(i * 4) * 2 + d];
                    for j in 0..4 {
                        let m = means[(i * 4 + j) * 2 + d];
                        if m > best {
                            best = m;
                        }
                    }
                    assert_eq!(r.row(i)[d], best);
                }
            }
        }
    }

    #[test]
    fn best_arm_breaks_ties_by_smallest_index() {
        let t = ArmMeansTensor::from_nested(&[vec![vec![0.5], vec![0.7], vec![0.7]]]).unwrap();
        assert_eq!(t.best_arm(0, 0), 1);
    }

    #[test]
    fn nested_round_trip() {
        let nested = vec![vec![vec![0.1, 0.2], vec![0.3, 0.4]], vec![vec![0.5, 0.6], vec![0.7, 0.8]]];
        let t = ArmMeansTensor::from_nested(&nested).unwrap();
        assert_eq!(t.to_nested(), nested);
        assert_eq!(t.mean(1, 0, 1), 0.6);
    }
}
