use crate::error::{Error, Result};
use crate::tensor::EfficiencyMatrix;
use crate::vector::{dominance_unchecked, Dominance};

/// Groups whose efficiency vector, raised by `epsilon` in every coordinate,
/// is strictly dominated by no other group. Sorted, 0-based, never empty.
pub fn pareto_set(r: &EfficiencyMatrix, epsilon: f64) -> Result<Vec<usize>> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::arg(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    let mut shifted = vec![0.0; r.n_dims()];
    let mut out = Vec::new();
    for (i, row) in r.rows().enumerate() {
        for (s, &x) in shifted.iter_mut().zip(row) {
            *s = x + epsilon;
        }
        let dominated = r
            .rows()
            .enumerate()
            .any(|(j, other)| j != i && dominance_unchecked(&shifted, other) == Dominance::Strict);
        if !dominated {
            out.push(i);
        }
    }
    Ok(out)
}

/// Membership mask form of [`pareto_set`] for the unshifted case.
pub(crate) fn pareto_mask(r: &EfficiencyMatrix) -> Vec<bool> {
    let mut mask = vec![false; r.n_groups()];
    for i in pareto_set(r, 0.0).expect("zero epsilon is valid") {
        mask[i] = true;
    }
    mask
}
