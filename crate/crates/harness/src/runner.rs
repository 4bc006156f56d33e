//! One algorithm on one instance, and judging its answer against the truth.

use bgi_core::baselines::{run_age, run_ge, run_tel, run_unis};
use bgi_core::eecb::{run_eecb, EecbConfig};
use bgi_core::gaps::best_weighted_group;
use bgi_core::te::{run_te, TeConfig};
use bgi_core::trace::TraceRecord;
use bgi_core::{efficiency, pareto_set, Instance, RngStream};

use crate::config::Algorithm;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub delta: f64,
    pub epsilon: f64,
    pub beta_scale: f64,
    pub max_rounds: u64,
    pub record_trace: bool,
}

impl RunParams {
    /// Accuracy the algorithm actually runs at, if it has one.
    pub fn effective_epsilon(&self, algorithm: Algorithm) -> Option<f64> {
        match algorithm {
            Algorithm::Eecb => None,
            Algorithm::Tel => Some(bgi_core::baselines::TEL_EPSILON),
            _ => Some(self.epsilon),
        }
    }

    fn te(&self) -> TeConfig {
        TeConfig {
            delta: self.delta,
            epsilon: self.epsilon,
            beta_scale: self.beta_scale,
            max_rounds: self.max_rounds,
            record_trace: self.record_trace,
        }
    }
}

/// Answer of either problem; indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Set(Vec<usize>),
    Single(usize),
}

impl Answer {
    pub fn indices(&self) -> Vec<usize> {
        match self {
            Answer::Set(v) => v.clone(),
            Answer::Single(i) => vec![*i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub answer: Answer,
    pub total_pulls: u64,
    pub rounds: u64,
    pub per_arm_pulls: Vec<u64>,
    pub trace: Option<Vec<TraceRecord>>,
}

pub fn run_algorithm(
    algorithm: Algorithm,
    instance: &Instance,
    weights: Option<&[f64]>,
    params: &RunParams,
    rng: &mut RngStream,
) -> Result<RunOutcome, HarnessError> {
    let weights = || {
        weights.ok_or_else(|| HarnessError::Usage(format!("algorithm {} needs a weight vector", algorithm.name())))
    };
    let gpsi = |r: bgi_core::te::GpsiResult| RunOutcome {
        answer: Answer::Set(r.recommended),
        total_pulls: r.total_pulls,
        rounds: r.rounds,
        per_arm_pulls: r.per_arm_pulls,
        trace: r.trace,
    };
    let lbgi = |r: bgi_core::eecb::LbgiResult| RunOutcome {
        answer: Answer::Single(r.recommended),
        total_pulls: r.total_pulls,
        rounds: r.rounds,
        per_arm_pulls: r.per_arm_pulls,
        trace: r.trace,
    };
    let out = match algorithm {
        Algorithm::Te => gpsi(run_te(instance, params.te(), rng)?),
        Algorithm::Age => gpsi(run_age(instance, params.te(), rng)?),
        Algorithm::Ge => gpsi(run_ge(instance, params.te(), rng)?),
        Algorithm::Unis => gpsi(run_unis(instance, params.delta, params.epsilon, rng)?),
        Algorithm::Tel => lbgi(run_tel(instance, weights()?, params.te(), rng)?),
        Algorithm::Eecb => {
            let cfg = EecbConfig {
                weights: weights()?.to_vec(),
                delta: params.delta,
                beta_scale: params.beta_scale,
                max_rounds: params.max_rounds,
                record_trace: params.record_trace,
            };
            lbgi(run_eecb(instance, cfg, rng)?)
        }
    };
    Ok(out)
}

/// Pareto-set answers must contain every optimal group and nothing outside
/// the `epsilon`-Pareto set; weighted answers must be the weighted argmax.
pub fn judge(instance: &Instance, answer: &Answer, epsilon: Option<f64>, weights: Option<&[f64]>) -> Result<bool, HarnessError> {
    let r = efficiency(&instance.tensor);
    match answer {
        Answer::Set(set) => {
            let eps = epsilon.ok_or_else(|| HarnessError::Usage("judging a set answer needs epsilon".into()))?;
            let exact = pareto_set(&r, 0.0)?;
            let relaxed = pareto_set(&r, eps)?;
            Ok(exact.iter().all(|i| set.contains(i)) && set.iter().all(|i| relaxed.contains(i)))
        }
        Answer::Single(i) => {
            let w = weights.ok_or_else(|| HarnessError::Usage("judging a single answer needs weights".into()))?;
            Ok(best_weighted_group(&r, w)? == *i)
        }
    }
}
