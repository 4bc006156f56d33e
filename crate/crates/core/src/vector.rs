//! Componentwise order on reward vectors and the two distance operators built
//! on it.
//!
//! `m_gap(v, u)` is the smallest uniform increase of `v` after which `u` no
//! longer strictly dominates it. `big_m_gap(v, u, alpha)` is the smallest
//! uniform increase of `u` after which `u` weakly dominates `v + alpha`.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// A D-dimensional reward (or mean reward) vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Self {
        RewardVector(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RewardVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for RewardVector {
    fn from(values: Vec<f64>) -> Self {
        RewardVector(values)
    }
}

/// Strongest relation by which `v` dominates `u`.
///
/// `Strict` implies `StrictPartial` implies `Weak`; the enum is ordered so
/// that `a >= Dominance::Weak` reads as "at least weakly dominated".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dominance {
    None,
    /// `u ≤ v` in every coordinate (includes equality).
    Weak,
    /// Weak domination with at least one strict coordinate.
    StrictPartial,
    /// `u < v` in every coordinate.
    Strict,
}

/// Relation of `v` over `u`.
pub fn dominance(u: &[f64], v: &[f64]) -> Result<Dominance> {
    check_len(u.len(), v.len())?;
    Ok(dominance_unchecked(u, v))
}

pub(crate) fn dominance_unchecked(u: &[f64], v: &[f64]) -> Dominance {
    let mut all_strict = true;
    let mut any_strict = false;
    for (&a, &b) in u.iter().zip(v) {
        if a > b {
            return Dominance::None;
        }
        if a < b {
            any_strict = true;
        } else {
            all_strict = false;
        }
    }
    if all_strict && !u.is_empty() {
        Dominance::Strict
    } else if any_strict {
        Dominance::StrictPartial
    } else {
        Dominance::Weak
    }
}

/// `[min_d (u_d - v_d)]⁺`.
pub fn m_gap(v: &[f64], u: &[f64]) -> Result<f64> {
    check_len(v.len(), u.len())?;
    Ok(m_gap_unchecked(v, u))
}

pub(crate) fn m_gap_unchecked(v: &[f64], u: &[f64]) -> f64 {
    let min = v
        .iter()
        .zip(u)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    min.max(0.0)
}

/// `[max_d (v_d - u_d + alpha)]⁺`.
pub fn big_m_gap(v: &[f64], u: &[f64], alpha: f64) -> Result<f64> {
    check_len(v.len(), u.len())?;
    if !(alpha >= 0.0) {
        return Err(Error::arg(format!("alpha must be non-negative, got {alpha}")));
    }
    Ok(big_m_gap_unchecked(v, u, alpha))
}

pub(crate) fn big_m_gap_unchecked(v: &[f64], u: &[f64], alpha: f64) -> f64 {
    let max = v
        .iter()
        .zip(u)
        .map(|(a, b)| (a + alpha) - b)
        .fold(f64::NEG_INFINITY, f64::max);
    max.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest alpha on a 1e-6 grid such that `v + alpha` is not strictly
    /// dominated by `u`.
    fn m_grid_oracle(v: &[f64], u: &[f64]) -> f64 {
        let mut k = 0u64;
        loop {
            let alpha = k as f64 * 1e-6;
            let shifted: Vec<f64> = v.iter().map(|x| x + alpha).collect();
            if !shifted.iter().zip(u).all(|(a, b)| a < b) {
                return alpha;
            }
            k += 1;
        }
    }

    /// Smallest beta on a 1e-6 grid such that `v ≤ u + beta`.
    fn big_m_grid_oracle(v: &[f64], u: &[f64]) -> f64 {
        let mut k = 0u64;
        loop {
            let beta = k as f64 * 1e-6;
            if v.iter().zip(u).all(|(a, b)| *a <= b + beta) {
                return beta;
            }
            k += 1;
        }
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(dominance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), Dominance::Weak);
        assert_eq!(dominance(&[0.1, 0.2], &[0.3, 0.5]).unwrap(), Dominance::Strict);
        assert_eq!(dominance(&[0.5, 0.1], &[0.3, 0.9]).unwrap(), Dominance::None);
        assert_eq!(
            dominance(&[0.5, 0.1], &[0.5, 0.9]).unwrap(),
            Dominance::StrictPartial
        );
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(
            dominance(&[0.1], &[0.1, 0.2]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(m_gap(&[0.1], &[0.1, 0.2]).is_err());
        assert!(big_m_gap(&[0.1, 0.3], &[0.1], 0.0).is_err());
    }

    #[test]
    fn negative_alpha_is_rejected() {
        assert!(matches!(
            big_m_gap(&[0.1], &[0.2], -0.1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn m_gap_examples() {
        let v = [0.1, 0.2];
        let u = [0.3, 0.5];
        // Frozen from the grid oracle: the first grid point at which strict
        // domination stops is 0.200000 (up to the 1e-6 grid step).
        let oracle = m_grid_oracle(&v, &u);
        assert!((oracle - 0.2).abs() <= 1e-6 + 1e-12, "oracle gave {oracle}");
        assert!((m_gap(&v, &u).unwrap() - 0.2).abs() < 1e-12);

        assert_eq!(m_gap(&[0.4, 0.7], &[0.4, 0.7]).unwrap(), 0.0);
        assert_eq!(m_gap(&[0.5, 0.1], &[0.3, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn big_m_gap_examples() {
        let v = [0.6, 0.2];
        let u = [0.5, 0.4];
        let oracle = big_m_grid_oracle(&v, &u);
        assert!((oracle - 0.1).abs() <= 1e-6 + 1e-12, "oracle gave {oracle}");
        assert!((big_m_gap(&v, &u, 0.0).unwrap() - 0.1).abs() < 1e-12);

        assert_eq!(big_m_gap(&[0.3, 0.8], &[0.3, 0.8], 0.0).unwrap(), 0.0);
        assert_eq!(big_m_gap(&[0.4, 0.4], &[0.5, 0.5], 0.1).unwrap(), 0.0);
    }

    fn pair(max_d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1..=max_d).prop_flat_map(|d| {
            (
                prop::collection::vec(0.0..1.0f64, d),
                prop::collection::vec(0.0..1.0f64, d),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn m_gap_zero_iff_not_strict((v, u) in pair(6)) {
            let zero = m_gap(&v, &u).unwrap() == 0.0;
            let strict = dominance(&v, &u).unwrap() == Dominance::Strict;
            prop_assert_eq!(zero, !strict);
        }

        #[test]
        fn big_m_gap_zero_iff_weak((v, u) in pair(6)) {
            let zero = big_m_gap(&v, &u, 0.0).unwrap() == 0.0;
            let weak = dominance(&v, &u).unwrap() >= Dominance::Weak;
            prop_assert_eq!(zero, weak);
        }
    }

    proptest! {
        #[test]
        fn big_m_triangle(d in 1usize..6, seed in prop::collection::vec(0.0..1.0f64, 18)) {
            let u = &seed[0..d];
            let v = &seed[6..6 + d];
            let s = &seed[12..12 + d];
            let lhs = big_m_gap(u, s, 0.0).unwrap();
            let rhs = big_m_gap(u, v, 0.0).unwrap() + big_m_gap(v, s, 0.0).unwrap();
            prop_assert!(lhs <= rhs + 1e-15);
        }
    }
}
