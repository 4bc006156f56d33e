//! Comparison algorithms: AGE and GE (triple elimination with phases
//! switched off), uniform sampling, and TEL.

use serde::{Deserialize, Serialize};

use crate::confidence::validate_delta;
use crate::eecb::LbgiResult;
use crate::environment::{ArmStreams, Instance, RngStream};
use crate::error::{Error, Result};
use crate::gaps::validate_weights;
use crate::pareto::pareto_set;
use crate::te::{GpsiResult, Phases, TeConfig, TripleElimination};
use crate::tensor::EfficiencyMatrix;
use crate::vector::m_gap_unchecked;

/// Accuracy TEL hands to triple elimination.
pub const TEL_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Age,
    Ge,
    Unis,
    Tel,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Age => "age",
            BaselineKind::Ge => "ge",
            BaselineKind::Unis => "unis",
            BaselineKind::Tel => "tel",
        }
    }

    /// True for the weighted problem, whose result is an [`LbgiResult`].
    pub fn is_lbgi(self) -> bool {
        self == BaselineKind::Tel
    }
}

/// Triple elimination without dimension elimination.
pub fn run_age(instance: &Instance, config: TeConfig, rng: &mut RngStream) -> Result<GpsiResult> {
    TripleElimination::new(instance, config, Phases::AGE, rng)?.run()
}

/// Group-level elimination only: every arm of every active group is pulled
/// each round.
pub fn run_ge(instance: &Instance, config: TeConfig, rng: &mut RngStream) -> Result<GpsiResult> {
    TripleElimination::new(instance, config, Phases::GE, rng)?.run()
}

/// `ceil(8 / eps^2 * ln(2 N K D / delta))`.
pub fn unis_pull_count(n_groups: usize, n_arms: usize, n_dims: usize, epsilon: f64, delta: f64) -> Result<u64> {
    validate_delta(delta)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let nkd = (n_groups * n_arms * n_dims) as f64;
    let r0 = (8.0 / (epsilon * epsilon) * (2.0 * nkd / delta).ln()).ceil();
    Ok(r0.max(1.0) as u64)
}

/// Pulls every arm `r0` times, then returns the empirical Pareto set plus
/// every group whose empirical gap to it is below `epsilon`.
pub fn run_unis(instance: &Instance, delta: f64, epsilon: f64, rng: &mut RngStream) -> Result<GpsiResult> {
    let (n, k, dims) = (instance.n_groups(), instance.n_arms(), instance.n_dims());
    let r0 = unis_pull_count(n, k, dims, epsilon, delta)?;

    let mut streams = ArmStreams::new(rng, n * k);
    let mut sample = vec![0.0; dims];
    let mut estimates = vec![f64::NEG_INFINITY; n * dims];
    for i in 0..n {
        for j in 0..k {
            let mut sums = vec![0.0; dims];
            for _ in 0..r0 {
                instance.sample_into(i, j, streams.arm(i * k + j), &mut sample);
                for (s, x) in sums.iter_mut().zip(&sample) {
                    *s += x;
                }
            }
            for d in 0..dims {
                let mean = sums[d] / r0 as f64;
                if mean > estimates[i * dims + d] {
                    estimates[i * dims + d] = mean;
                }
            }
        }
    }
    let r_hat = EfficiencyMatrix::from_flat(dims, estimates);
    let optimal = pareto_set(&r_hat, 0.0)?;
    let recommended: Vec<usize> = (0..n)
        .filter(|i| {
            optimal.contains(i)
                || optimal
                    .iter()
                    .map(|&j| m_gap_unchecked(r_hat.row(*i), r_hat.row(j)))
                    .fold(0.0, f64::max)
                    < epsilon
        })
        .collect();

    Ok(GpsiResult {
        recommended,
        total_pulls: r0 * (n * k) as u64,
        per_arm_pulls: vec![r0; n * k],
        rounds: r0,
        final_estimates: Some(r_hat),
        trace: None,
    })
}

/// Triple elimination at accuracy [`TEL_EPSILON`] ignoring the weights,
/// followed by the weighted argmax over its output (smallest index on ties).
pub fn run_tel(instance: &Instance, weights: &[f64], config: TeConfig, rng: &mut RngStream) -> Result<LbgiResult> {
    validate_weights(weights, instance.n_dims())?;
    let config = TeConfig {
        epsilon: TEL_EPSILON,
        ..config
    };
    let res = TripleElimination::new(instance, config, Phases::TE, rng)?.run()?;
    let estimates = res
        .final_estimates
        .as_ref()
        .ok_or_else(|| Error::Internal("missing final estimates".into()))?;
    let scores = estimates.weighted_scores(weights);
    let mut best: Option<usize> = None;
    for &i in &res.recommended {
        if best.is_none_or(|b| scores[i] > scores[b]) {
            best = Some(i);
        }
    }
    let recommended = best.ok_or_else(|| Error::Internal("triple elimination returned no group".into()))?;
    Ok(LbgiResult {
        recommended,
        total_pulls: res.total_pulls,
        per_arm_pulls: res.per_arm_pulls,
        rounds: res.rounds,
        trace: res.trace,
    })
}
