//! Anytime confidence radius shared by the elimination algorithms.
//!
//! `beta(r, delta) = scale * sqrt(2 * ln(4 N K D r^2 / delta) / r)` is a
//! Hoeffding radius with a union bound over every arm, every objective and
//! every sample count, so one radius holds for all of them simultaneously
//! with probability at least `1 - delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pre-validated radius schedule for a fixed problem size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRadius {
    n_groups: usize,
    n_arms: usize,
    n_dims: usize,
    delta: f64,
    scale: f64,
    log_base: f64,
}

impl ConfidenceRadius {
    pub fn new(n_groups: usize, n_arms: usize, n_dims: usize, delta: f64, scale: f64) -> Result<Self> {
        validate_delta(delta)?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::arg(format!("beta scale must be positive, got {scale}")));
        }
        if n_groups == 0 || n_arms == 0 || n_dims == 0 {
            return Err(Error::arg("N, K and D must be positive"));
        }
        let nkd = (n_groups * n_arms * n_dims) as f64;
        Ok(ConfidenceRadius {
            n_groups,
            n_arms,
            n_dims,
            delta,
            scale,
            log_base: (4.0 * nkd / delta).ln(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Radius after `r >= 1` samples (or rounds).
    pub fn at(&self, r: u64) -> f64 {
        debug_assert!(r >= 1);
        let r = r as f64;
        // ln(4NKD r^2 / delta) split so huge r cannot overflow the product.
        self.scale * (2.0 * (self.log_base + 2.0 * r.ln()) / r).sqrt()
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.n_groups, self.n_arms, self.n_dims)
    }
}

pub(crate) fn validate_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// One-shot evaluation of the radius.
pub fn beta(r: u64, delta: f64, n_groups: usize, n_arms: usize, n_dims: usize, scale: f64) -> Result<f64> {
    if r == 0 {
        return Err(Error::arg("round index r must be at least 1"));
    }
    Ok(ConfidenceRadius::new(n_groups, n_arms, n_dims, delta, scale)?.at(r))
}

/// Round count `ceil(30 ln(NKD / (delta * gap)) / gap^2)` after which the
/// unscaled radius is guaranteed to be below `gap` (for `0 < gap <= 1` and NKD >= 2).
pub fn rounds_to_reach(gap: f64, delta: f64, n_groups: usize, n_arms: usize, n_dims: usize) -> Result<u64> {
    validate_delta(delta)?;
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(Error::arg(format!("gap must lie in (0, 1], got {gap}")));
    }
    let nkd = (n_groups * n_arms * n_dims) as f64;
    Ok((30.0 * (nkd / (delta * gap)).ln() / (gap * gap)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_round_value() {
        // sqrt(2 ln 30000), evaluated independently in double precision
        // with Python's math module: 4.540694365544612.
        let b = beta(1, 0.01, 5, 5, 3, 1.0).unwrap();
        assert!((b - 4.540694365544612).abs() < 1e-12, "{b}");
    }

    #[test]
    fn scale_multiplies() {
        let a = beta(17, 0.05, 3, 2, 2, 1.0).unwrap();
        let b = beta(17, 0.05, 3, 2, 2, 0.25).unwrap();
        assert!((b - 0.25 * a).abs() < 1e-15);
    }

    #[test]
    fn strictly_decreasing_in_rounds() {
        let c = ConfidenceRadius::new(5, 5, 3, 0.01, 1.0).unwrap();
        let mut prev = c.at(1);
        for r in 2..=1_000_000u64 {
            let cur = c.at(r);
            assert!(cur < prev, "beta({r}) = {cur} >= beta({}) = {prev}", r - 1);
            prev = cur;
        }
    }

    #[test]
    fn increasing_in_problem_size() {
        let base = beta(100, 0.1, 2, 2, 2, 1.0).unwrap();
        assert!(beta(100, 0.1, 3, 2, 2, 1.0).unwrap() > base);
        assert!(beta(100, 0.1, 2, 3, 2, 1.0).unwrap() > base);
        assert!(beta(100, 0.1, 2, 2, 3, 1.0).unwrap() > base);
    }

    #[test]
    fn schedule_reaches_gap() {
        let r = rounds_to_reach(0.3, 0.1, 2, 2, 2).unwrap();
        assert!(beta(r, 0.1, 2, 2, 2, 1.0).unwrap() < 0.3);
    }

    #[test]
    fn argument_validation() {
        assert!(beta(1, 0.0, 1, 1, 1, 1.0).is_err());
        assert!(beta(1, 1.0, 1, 1, 1, 1.0).is_err());
        assert!(beta(0, 0.5, 1, 1, 1, 1.0).is_err());
        assert!(beta(1, 0.5, 1, 1, 1, 0.0).is_err());
        assert!(rounds_to_reach(0.0, 0.1, 2, 2, 2).is_err());
    }
}
