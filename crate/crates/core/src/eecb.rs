//! Equal-effect confidence bounds for weighted best-group identification.
//!
//! Each dimension `d` keeps its own sample count `n^d`. A round focuses the
//! dimension with the largest weighted radius `w^d β(n^d)` and pulls only
//! those arms still active in that dimension whose pull count equals `n^d`,
//! so the weighted radii stay close to one another.

use serde::Serialize;

use crate::confidence::{validate_delta, ConfidenceRadius};
use crate::environment::{ArmStreams, Instance, RngStream};
use crate::error::{Error, PartialRun, Result};
use crate::gaps::validate_weights;
use crate::te::{InvariantViolation, DEFAULT_MAX_ROUNDS};
use crate::tensor::ArmMeansTensor;
use crate::trace::{TraceEvent, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct EecbConfig {
    pub weights: Vec<f64>,
    pub delta: f64,
    pub beta_scale: f64,
    pub max_rounds: u64,
    pub record_trace: bool,
}

impl EecbConfig {
    pub fn new(weights: Vec<f64>, delta: f64) -> Self {
        EecbConfig {
            weights,
            delta,
            beta_scale: 1.0,
            max_rounds: DEFAULT_MAX_ROUNDS,
            record_trace: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// Flat layouts: arm sets are `(d * N + i) * K + j`, group×arm tables
/// `i * K + j`, sums `(i * K + j) * D + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EecbState {
    pub n_groups: usize,
    pub n_arms: usize,
    pub n_dims: usize,
    pub active_groups: Vec<bool>,
    pub active_arms: Vec<bool>,
    /// `n(r)`; every entry starts at 1.
    pub focus_counts: Vec<u64>,
    pub sums: Vec<f64>,
    pub pull_counts: Vec<u64>,
    /// Round index `r`, 1 right after initialisation.
    pub round: u64,
}

impl EecbState {
    pub fn is_arm_active(&self, d: usize, i: usize, j: usize) -> bool {
        self.active_arms[(d * self.n_groups + i) * self.n_arms + j]
    }

    pub fn pulls(&self, i: usize, j: usize) -> u64 {
        self.pull_counts[i * self.n_arms + j]
    }

    pub fn empirical_mean(&self, i: usize, j: usize, d: usize) -> f64 {
        self.sums[(i * self.n_arms + j) * self.n_dims + d] / self.pulls(i, j) as f64
    }

    /// `R̂_i^d` over all of the group's arms.
    pub fn efficiency_estimate(&self, i: usize, d: usize) -> f64 {
        (0..self.n_arms)
            .map(|j| self.empirical_mean(i, j, d))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn weighted_score(&self, i: usize, weights: &[f64]) -> f64 {
        (0..self.n_dims).map(|d| weights[d] * self.efficiency_estimate(i, d)).sum()
    }

    pub fn active_group_indices(&self) -> Vec<usize> {
        (0..self.n_groups).filter(|&i| self.active_groups[i]).collect()
    }

    pub fn total_pulls(&self) -> u64 {
        self.pull_counts.iter().sum()
    }

    fn partial(&self) -> PartialRun {
        PartialRun {
            rounds: self.round,
            total_pulls: self.total_pulls(),
            per_arm_pulls: self.pull_counts.clone(),
            active_groups: self.active_group_indices(),
            accepted: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbgiResult {
    /// 0-based.
    pub recommended: usize,
    pub total_pulls: u64,
    pub per_arm_pulls: Vec<u64>,
    /// Loop iterations after initialisation.
    pub rounds: u64,
    #[serde(skip)]
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Debug)]
pub struct Eecb<'a> {
    instance: &'a Instance,
    config: EecbConfig,
    radius: ConfidenceRadius,
    state: EecbState,
    trace: Vec<TraceRecord>,
    sample: Vec<f64>,
    streams: ArmStreams,
}

impl<'a> Eecb<'a> {
    /// Validates the configuration and pulls every arm once.
    pub fn new(instance: &'a Instance, config: EecbConfig, rng: &mut RngStream) -> Result<Self> {
        let (n, k, dims) = (instance.n_groups(), instance.n_arms(), instance.n_dims());
        validate_weights(&config.weights, dims)?;
        validate_delta(config.delta)?;
        if config.max_rounds == 0 {
            return Err(Error::arg("max_rounds must be positive"));
        }
        let radius = ConfidenceRadius::new(n, k, dims, config.delta, config.beta_scale)?;
        let mut me = Eecb {
            instance,
            config,
            radius,
            state: EecbState {
                n_groups: n,
                n_arms: k,
                n_dims: dims,
                active_groups: vec![true; n],
                active_arms: vec![true; dims * n * k],
                focus_counts: vec![1; dims],
                sums: vec![0.0; n * k * dims],
                pull_counts: vec![0; n * k],
                round: 1,
            },
            trace: Vec::new(),
            sample: vec![0.0; dims],
            streams: ArmStreams::new(rng, n * k),
        };
        for i in 0..n {
            for j in 0..k {
                me.pull(i, j);
            }
        }
        Ok(me)
    }

    pub fn state(&self) -> &EecbState {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        self.state.active_groups.iter().filter(|&&a| a).count() <= 1
    }

    fn pull(&mut self, i: usize, j: usize) {
        let dims = self.state.n_dims;
        let stream = self.streams.arm(i * self.state.n_arms + j);
        self.instance.sample_into(i, j, stream, &mut self.sample);
        let base = (i * self.state.n_arms + j) * dims;
        for (s, x) in self.state.sums[base..base + dims].iter_mut().zip(&self.sample) {
            *s += x;
        }
        self.state.pull_counts[i * self.state.n_arms + j] += 1;
    }

    fn log(&mut self, event: TraceEvent) {
        if self.config.record_trace {
            self.trace.push(TraceRecord {
                round: self.state.round,
                event,
            });
        }
    }

    /// One loop iteration. Does nothing once finished.
    pub fn step(&mut self) {
        if self.is_finished() {
            return;
        }
        let (n, k, dims) = (self.state.n_groups, self.state.n_arms, self.state.n_dims);
        let w = self.config.weights.clone();
        let betas: Vec<f64> = self.state.focus_counts.iter().map(|&c| self.radius.at(c)).collect();

        // Group elimination, against the scores at the start of the phase.
        let threshold = 2.0 * (0..dims).map(|d| w[d] * betas[d]).sum::<f64>();
        let active = self.state.active_group_indices();
        let scores: Vec<f64> = (0..n).map(|i| self.state.weighted_score(i, &w)).collect();
        let top = active.iter().map(|&i| scores[i]).fold(f64::NEG_INFINITY, f64::max);
        for &i in &active {
            if top - scores[i] > threshold {
                self.state.active_groups[i] = false;
                self.log(TraceEvent::EliminateGroup { group: i, score: scores[i] });
            }
        }

        // Per-dimension arm elimination over every group's arms.
        for d in 0..dims {
            for i in 0..n {
                let best = (0..k)
                    .filter(|&l| self.state.is_arm_active(d, i, l))
                    .map(|l| self.state.empirical_mean(i, l, d))
                    .fold(f64::NEG_INFINITY, f64::max);
                for j in 0..k {
                    if self.state.is_arm_active(d, i, j) && best > self.state.empirical_mean(i, j, d) + 2.0 * betas[d] {
                        self.state.active_arms[(d * n + i) * k + j] = false;
                        self.log(TraceEvent::EliminateArmDim { group: i, arm: j, dim: d });
                    }
                }
            }
        }

        // Focus dimension, smallest index on ties.
        let mut focus = 0;
        for d in 1..dims {
            if w[d] * betas[d] > w[focus] * betas[focus] {
                focus = d;
            }
        }
        let count = self.state.focus_counts[focus];
        let counts_before = self.state.focus_counts.clone();

        let mut pulled = 0;
        for i in self.state.active_group_indices() {
            if !(0..k).any(|j| self.state.is_arm_active(focus, i, j)) {
                self.log(TraceEvent::Anomaly { group: i, dim: focus });
                continue;
            }
            for j in 0..k {
                if self.state.is_arm_active(focus, i, j) && self.state.pulls(i, j) == count {
                    self.pull(i, j);
                    pulled += 1;
                }
            }
        }
        self.log(TraceEvent::FocusDim {
            dim: focus,
            counts: counts_before,
            weighted_radius: w[focus] * betas[focus],
            pulls: pulled,
        });

        self.state.focus_counts[focus] += 1;
        self.state.round += 1;
    }

    pub fn run(mut self) -> Result<LbgiResult> {
        while !self.is_finished() {
            if self.state.round > self.config.max_rounds {
                return Err(Error::BudgetExhausted {
                    max_rounds: self.config.max_rounds,
                    partial: Box::new(self.state.partial()),
                });
            }
            self.step();
        }
        let active = self.state.active_group_indices();
        let &[recommended] = active.as_slice() else {
            return Err(Error::Internal(format!("{} groups left active", active.len())));
        };
        Ok(LbgiResult {
            recommended,
            total_pulls: self.state.total_pulls(),
            per_arm_pulls: self.state.pull_counts.clone(),
            rounds: self.state.round - 1,
            trace: self.config.record_trace.then_some(self.trace),
        })
    }
}

pub fn run_eecb(instance: &Instance, config: EecbConfig, rng: &mut RngStream) -> Result<LbgiResult> {
    Eecb::new(instance, config, rng)?.run()
}

/// Replays the `focus_dim` events of a trace. Checks that each focus
/// maximised `w^d β(n^d)` (ties to the smallest index), that the focused
/// radius then shrinks, and that consecutive count vectors differ by exactly
/// the focused unit vector.
pub fn eecb_schedule_property(trace: &[TraceRecord], weights: &[f64], radius: &ConfidenceRadius) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let mut prev: Option<(usize, &Vec<u64>)> = None;
    for rec in trace {
        let TraceEvent::FocusDim { dim, counts, .. } = &rec.event else {
            continue;
        };
        let wb: Vec<f64> = counts.iter().zip(weights).map(|(&c, w)| w * radius.at(c)).collect();
        let argmax = (0..wb.len()).fold(0, |b, d| if wb[d] > wb[b] { d } else { b });
        if argmax != *dim {
            out.push(InvariantViolation {
                name: "focus_is_argmax",
                detail: format!("round {}: focused {} but argmax is {}", rec.round, dim + 1, argmax + 1),
            });
        }
        if !(weights[*dim] * radius.at(counts[*dim] + 1) < wb[*dim]) {
            out.push(InvariantViolation {
                name: "focus_shrinks_radius",
                detail: format!("round {}: radius of dim {} did not shrink", rec.round, dim + 1),
            });
        }
        if counts.iter().map(|c| c - 1).sum::<u64>() != rec.round - 1 {
            out.push(InvariantViolation {
                name: "one_focus_per_round",
                detail: format!("round {}: counts {counts:?}", rec.round),
            });
        }
        if let Some((pd, pc)) = prev {
            let expected: Vec<u64> = pc.iter().enumerate().map(|(d, &c)| c + (d == pd) as u64).collect();
            if &expected != counts {
                out.push(InvariantViolation {
                    name: "counts_follow_focus",
                    detail: format!("round {}: expected {expected:?}, found {counts:?}", rec.round),
                });
            }
        }
        prev = Some((*dim, counts));
    }
    out
}

/// Checks one loop iteration: exactly one focus count moved, and every arm
/// pulled was active in the focused dimension with a count equal to it.
pub fn eecb_step_check(prev: &EecbState, next: &EecbState) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let moved: Vec<usize> = (0..prev.n_dims)
        .filter(|&d| next.focus_counts[d] != prev.focus_counts[d])
        .collect();
    let &[focus] = moved.as_slice() else {
        out.push(InvariantViolation {
            name: "one_focus_per_round",
            detail: format!("{:?} -> {:?}", prev.focus_counts, next.focus_counts),
        });
        return out;
    };
    for i in 0..prev.n_groups {
        for j in 0..prev.n_arms {
            let added = next.pulls(i, j) - prev.pulls(i, j);
            let eligible = next.active_groups[i]
                && next.is_arm_active(focus, i, j)
                && prev.pulls(i, j) == prev.focus_counts[focus];
            if added > 1 || (added == 1 && !eligible) {
                out.push(InvariantViolation {
                    name: "pull_matches_focus",
                    detail: format!("arm ({}, {}) pulled {added} times in round {}", i + 1, j + 1, prev.round),
                });
            }
        }
    }
    out
}

/// Structural invariants of one state. With `noiseless_truth`, also checks
/// that each active group's true best arm in every dimension is still in
/// that dimension's active set.
pub fn eecb_state_invariant_check(state: &EecbState, noiseless_truth: Option<&ArmMeansTensor>) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let (n, k, dims) = (state.n_groups, state.n_arms, state.n_dims);
    let mut fail = |name: &'static str, detail: String| out.push(InvariantViolation { name, detail });
    if state.focus_counts.contains(&0) {
        fail("focus_counts_positive", format!("{:?}", state.focus_counts));
    }
    if state.focus_counts.iter().map(|c| c.saturating_sub(1)).sum::<u64>() != state.round - 1 {
        fail("one_focus_per_round", format!("round {}: counts {:?}", state.round, state.focus_counts));
    }
    let min_count = *state.focus_counts.iter().min().unwrap_or(&1);
    let max_count = *state.focus_counts.iter().max().unwrap_or(&1);
    for i in 0..n {
        for j in 0..k {
            let c = state.pulls(i, j);
            let active_dims: Vec<usize> = (0..dims).filter(|&d| state.is_arm_active(d, i, j)).collect();
            // An arm is only pulled while its count equals the focused count.
            if c > max_count {
                fail("pulls_within_focus", format!("arm ({}, {}) has {c} pulls, counts {:?}", i + 1, j + 1, state.focus_counts));
            }
            if state.active_groups[i] && active_dims.len() == dims && c < min_count {
                fail("pulls_keep_up", format!("arm ({}, {}) has {c} pulls, min count {min_count}", i + 1, j + 1));
            }
        }
    }
    if let Some(truth) = noiseless_truth {
        for i in (0..n).filter(|&i| state.active_groups[i]) {
            for d in 0..dims {
                let best = truth.best_arm(i, d);
                if !state.is_arm_active(d, i, best) {
                    fail(
                        "best_arm_active",
                        format!("best arm {} of group {} left dim {}", best + 1, i + 1, d + 1),
                    );
                }
            }
        }
    }
    out
}
