//! Triple elimination for group Pareto-set identification.
//!
//! Each round pulls every arm that is still active in some active dimension
//! of an active group, then runs four phases in order:
//!
//! 1. group rejection: drop `i` if some active `j` has `m(R̂_i, R̂_j) >= 2β`;
//! 2. dimension elimination: resolve `(i, d)` when every other active group
//!    sits at least `4β + ε` away in dimension `d`, freezing `R̂_i^d`;
//! 3. arm elimination: drop `(i, j)` from dimension `d` once
//!    `μ̂_ij^d <= R̂_i^d - 2β`;
//! 4. acceptance: groups that are `2β`-separated (with slack `ε`) from every
//!    other active group, and that no unsettled group can still overtake,
//!    move to the output set.
//!
//! The run ends when no active group remains. `β` is the anytime radius
//! evaluated at the round index.
//!
//! [`Phases`] switches phases 2 and 3 off to obtain the AGE and GE baselines.

use serde::Serialize;

use crate::confidence::{validate_delta, ConfidenceRadius};
use crate::environment::{ArmStreams, Instance, RngStream};
use crate::error::{Error, PartialRun, Result};
use crate::tensor::{ArmMeansTensor, EfficiencyMatrix};
use crate::trace::{TraceEvent, TraceRecord};
use crate::vector::{big_m_gap_unchecked, m_gap_unchecked};

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub beta_scale: f64,
    pub max_rounds: u64,
    pub record_trace: bool,
}

impl TeConfig {
    pub fn new(delta: f64, epsilon: f64) -> Self {
        TeConfig {
            delta,
            epsilon,
            beta_scale: 1.0,
            max_rounds: DEFAULT_MAX_ROUNDS,
            record_trace: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    fn validate(&self) -> Result<()> {
        validate_delta(self.delta)?;
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::arg(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_rounds == 0 {
            return Err(Error::arg("max_rounds must be positive"));
        }
        Ok(())
    }
}

/// Which optional elimination phases run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phases {
    pub dimension_elimination: bool,
    pub arm_elimination: bool,
}

impl Phases {
    pub const TE: Phases = Phases {
        dimension_elimination: true,
        arm_elimination: true,
    };
    pub const AGE: Phases = Phases {
        dimension_elimination: false,
        arm_elimination: true,
    };
    pub const GE: Phases = Phases {
        dimension_elimination: false,
        arm_elimination: false,
    };
}

/// Full algorithm state after a completed round.
///
/// Flat layouts: group×dim tables are `i * D + d`, arm sets are
/// `(i * D + d) * K + j`, group×arm tables are `i * K + j`, and sums are
/// `(i * K + j) * D + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TeState {
    pub n_groups: usize,
    pub n_arms: usize,
    pub n_dims: usize,
    pub active_groups: Vec<bool>,
    pub active_dims: Vec<bool>,
    pub active_arms: Vec<bool>,
    /// Estimate adhered to once `(i, d)` is resolved.
    pub frozen: Vec<Option<f64>>,
    pub sums: Vec<f64>,
    pub pull_counts: Vec<u64>,
    /// Accepted groups in acceptance order.
    pub accepted: Vec<usize>,
    /// Efficiency estimates R̂ at the end of the last round; rows of groups
    /// that left the active set keep their value at departure.
    pub estimates: Vec<f64>,
    /// Number of completed rounds.
    pub round: u64,
}

impl TeState {
    fn new(n: usize, k: usize, d: usize) -> Self {
        TeState {
            n_groups: n,
            n_arms: k,
            n_dims: d,
            active_groups: vec![true; n],
            active_dims: vec![true; n * d],
            active_arms: vec![true; n * d * k],
            frozen: vec![None; n * d],
            sums: vec![0.0; n * k * d],
            pull_counts: vec![0; n * k],
            accepted: Vec::new(),
            estimates: vec![0.0; n * d],
            round: 0,
        }
    }

    pub fn is_group_active(&self, i: usize) -> bool {
        self.active_groups[i]
    }

    pub fn is_dim_active(&self, i: usize, d: usize) -> bool {
        self.active_dims[i * self.n_dims + d]
    }

    pub fn is_arm_active(&self, i: usize, d: usize, j: usize) -> bool {
        self.active_arms[(i * self.n_dims + d) * self.n_arms + j]
    }

    /// Active in at least one active dimension of its group (group activity
    /// is not considered).
    pub fn is_arm_pullable(&self, i: usize, j: usize) -> bool {
        (0..self.n_dims).any(|d| self.is_dim_active(i, d) && self.is_arm_active(i, d, j))
    }

    pub fn pulls(&self, i: usize, j: usize) -> u64 {
        self.pull_counts[i * self.n_arms + j]
    }

    pub fn empirical_mean(&self, i: usize, j: usize, d: usize) -> f64 {
        self.sums[(i * self.n_arms + j) * self.n_dims + d] / self.pulls(i, j) as f64
    }

    pub fn estimate(&self, i: usize) -> &[f64] {
        &self.estimates[i * self.n_dims..(i + 1) * self.n_dims]
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
            accepted: self.accepted.clone(),
        }
    }

    fn refresh_estimate(&mut self, i: usize) {
        for d in 0..self.n_dims {
            let v = match self.frozen[i * self.n_dims + d] {
                Some(v) => v,
                None => (0..self.n_arms)
                    .map(|j| self.empirical_mean(i, j, d))
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            self.estimates[i * self.n_dims + d] = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpsiResult {
    /// Accepted groups, sorted, 0-based.
    pub recommended: Vec<usize>,
    pub total_pulls: u64,
    /// Row-major N×K.
    pub per_arm_pulls: Vec<u64>,
    pub rounds: u64,
    /// Efficiency estimates held at termination (frozen where resolved).
    #[serde(skip)]
    pub final_estimates: Option<EfficiencyMatrix>,
    #[serde(skip)]
    pub trace: Option<Vec<TraceRecord>>,
}

/// Stepwise runner; [`run_te`] drives it to completion.
#[derive(Debug)]
pub struct TripleElimination<'a> {
    instance: &'a Instance,
    config: TeConfig,
    phases: Phases,
    radius: ConfidenceRadius,
    state: TeState,
    trace: Vec<TraceRecord>,
    sample: Vec<f64>,
    streams: ArmStreams,
}

impl<'a> TripleElimination<'a> {
    /// Rewards are drawn from per-arm streams keyed by one draw from `rng`.
    pub fn new(instance: &'a Instance, config: TeConfig, phases: Phases, rng: &mut RngStream) -> Result<Self> {
        config.validate()?;
        let (n, k, d) = (instance.n_groups(), instance.n_arms(), instance.n_dims());
        let radius = ConfidenceRadius::new(n, k, d, config.delta, config.beta_scale)?;
        Ok(TripleElimination {
            instance,
            config,
            phases,
            radius,
            state: TeState::new(n, k, d),
            trace: Vec::new(),
            sample: vec![0.0; d],
            streams: ArmStreams::new(rng, n * k),
        })
    }

    pub fn state(&self) -> &TeState {
        &self.state
    }

    pub fn is_finished(&self) -> bool {
        !self.state.active_groups.iter().any(|&a| a)
    }

    fn log(&mut self, event: TraceEvent) {
        if self.config.record_trace {
            self.trace.push(TraceRecord {
                round: self.state.round + 1,
                event,
            });
        }
    }

    /// Runs one full round. Does nothing once finished.
    pub fn step(&mut self) {
        if self.is_finished() {
            return;
        }
        let (n, k, dims) = (self.state.n_groups, self.state.n_arms, self.state.n_dims);
        let r = self.state.round + 1;
        let beta = self.radius.at(r);
        let eps = self.config.epsilon;

        // Sampling.
        for i in 0..n {
            if !self.state.active_groups[i] {
                continue;
            }
            for j in 0..k {
                if !self.state.is_arm_pullable(i, j) {
                    continue;
                }
                self.instance.sample_into(i, j, self.streams.arm(i * k + j), &mut self.sample);
                let base = (i * k + j) * dims;
                for (s, x) in self.state.sums[base..base + dims].iter_mut().zip(&self.sample) {
                    *s += x;
                }
                self.state.pull_counts[i * k + j] += 1;
            }
            self.state.refresh_estimate(i);
        }

        // Group rejection.
        for i in 0..n {
            if !self.state.active_groups[i] {
                continue;
            }
            let dominated = (0..n).any(|j| {
                j != i
                    && self.state.active_groups[j]
                    && m_gap_unchecked(self.state.estimate(i), self.state.estimate(j)) >= 2.0 * beta
            });
            if dominated {
                self.state.active_groups[i] = false;
                let efficiency = self.state.estimate(i).to_vec();
                self.log(TraceEvent::RejectGroup { group: i, efficiency });
            }
        }

        // Dimension elimination.
        if self.phases.dimension_elimination {
            let threshold = 4.0 * beta + eps;
            for i in 0..n {
                if !self.state.active_groups[i] {
                    continue;
                }
                for d in 0..dims {
                    if !self.state.is_dim_active(i, d) {
                        continue;
                    }
                    let own = self.state.estimate(i)[d];
                    let resolved = (0..n).all(|j| {
                        j == i
                            || !self.state.active_groups[j]
                            || (self.state.estimate(j)[d] - own).abs() >= threshold
                    });
                    if resolved {
                        self.state.active_dims[i * dims + d] = false;
                        self.state.frozen[i * dims + d] = Some(own);
                        self.log(TraceEvent::ResolveDim {
                            group: i,
                            dim: d,
                            value: own,
                        });
                    }
                }
            }
        }

        // Arm elimination.
        if self.phases.arm_elimination {
            for i in 0..n {
                if !self.state.active_groups[i] {
                    continue;
                }
                for d in 0..dims {
                    if !self.state.is_dim_active(i, d) {
                        continue;
                    }
                    let cut = self.state.estimate(i)[d] - 2.0 * beta;
                    for j in 0..k {
                        if self.state.is_arm_active(i, d, j) && self.state.empirical_mean(i, j, d) <= cut {
                            self.state.active_arms[(i * dims + d) * k + j] = false;
                            self.log(TraceEvent::EliminateArm { group: i, dim: d, arm: j });
                        }
                    }
                }
            }
        }

        // Acceptance.
        let active = self.state.active_group_indices();
        let separated = |a: usize, b: usize| -> bool {
            big_m_gap_unchecked(self.state.estimate(a), self.state.estimate(b), eps) >= 2.0 * beta
        };
        let p1: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| active.iter().all(|&j| j == i || separated(i, j)))
            .collect();
        let p2: Vec<usize> = p1
            .iter()
            .copied()
            .filter(|&i| active.iter().filter(|j| !p1.contains(j)).all(|&j| separated(j, i)))
            .collect();
        for &i in &p2 {
            self.state.active_groups[i] = false;
            self.state.accepted.push(i);
            let efficiency = self.state.estimate(i).to_vec();
            self.log(TraceEvent::AcceptGroup { group: i, efficiency });
        }

        self.state.round = r;
    }

    pub fn into_result(self) -> GpsiResult {
        let mut recommended = self.state.accepted.clone();
        recommended.sort_unstable();
        let final_estimates = Some(EfficiencyMatrix::from_flat(
            self.state.n_dims,
            self.state.estimates.clone(),
        ));
        GpsiResult {
            recommended,
            total_pulls: self.state.total_pulls(),
            per_arm_pulls: self.state.pull_counts.clone(),
            rounds: self.state.round,
            final_estimates,
            trace: self.config.record_trace.then_some(self.trace),
        }
    }

    /// Steps until termination or until `max_rounds` rounds have run.
    pub fn run(mut self) -> Result<GpsiResult> {
        while !self.is_finished() {
            if self.state.round >= self.config.max_rounds {
                return Err(Error::BudgetExhausted {
                    max_rounds: self.config.max_rounds,
                    partial: Box::new(self.state.partial()),
                });
            }
            self.step();
        }
        Ok(self.into_result())
    }
}

/// Triple elimination with all three elimination phases.
pub fn run_te(instance: &Instance, config: TeConfig, rng: &mut RngStream) -> Result<GpsiResult> {
    TripleElimination::new(instance, config, Phases::TE, rng)?.run()
}

/// A named invariant that failed, with details.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub name: &'static str,
    pub detail: String,
}

/// Structural invariants of a single state. When `noiseless_truth` is given
/// (the run used noise scale 0 on that tensor), also checks that the true
/// best arm of every active (group, dimension) is still active.
pub fn te_round_invariant_check(state: &TeState, noiseless_truth: Option<&ArmMeansTensor>) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let (n, k, dims) = (state.n_groups, state.n_arms, state.n_dims);
    let mut fail = |name: &'static str, detail: String| out.push(InvariantViolation { name, detail });

    for &i in &state.accepted {
        if state.active_groups[i] {
            fail("accepted_disjoint_from_active", format!("group {} is accepted and active", i + 1));
        }
    }
    let mut seen = vec![false; n];
    for &i in &state.accepted {
        if std::mem::replace(&mut seen[i], true) {
            fail("accepted_unique", format!("group {} accepted twice", i + 1));
        }
    }
    for i in 0..n {
        for d in 0..dims {
            if state.frozen[i * dims + d].is_some() == state.is_dim_active(i, d) {
                fail(
                    "frozen_matches_resolved",
                    format!("group {} dim {}: frozen value and active flag disagree", i + 1, d + 1),
                );
            }
        }
    }
    for i in 0..n {
        for j in 0..k {
            let c = state.pulls(i, j);
            if c > state.round {
                fail("pull_accounting", format!("arm ({}, {}) pulled {c} times in {} rounds", i + 1, j + 1, state.round));
            }
            if state.round > 0 && state.active_groups[i] && state.is_arm_pullable(i, j) && c != state.round {
                fail(
                    "pull_accounting",
                    format!("active arm ({}, {}) pulled {c} times in {} rounds", i + 1, j + 1, state.round),
                );
            }
            if state.round > 0 && c == 0 {
                fail("pull_accounting", format!("arm ({}, {}) never pulled", i + 1, j + 1));
            }
        }
    }
    if let Some(truth) = noiseless_truth {
        for i in (0..n).filter(|&i| state.active_groups[i]) {
            for d in (0..dims).filter(|&d| state.is_dim_active(i, d)) {
                let best = truth.best_arm(i, d);
                if !state.is_arm_active(i, d, best) {
                    fail(
                        "best_arm_active",
                        format!("best arm {} of group {} dim {} was eliminated", best + 1, i + 1, d + 1),
                    );
                }
            }
        }
    }
    out
}

/// Monotonicity between consecutive states: active sets only shrink, the
/// accepted set only grows, and frozen values never change.
pub fn te_progress_check(prev: &TeState, next: &TeState) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let mut fail = |name: &'static str, detail: String| out.push(InvariantViolation { name, detail });
    let gained = |a: &[bool], b: &[bool]| a.iter().zip(b).any(|(x, y)| !*x && *y);
    if gained(&prev.active_groups, &next.active_groups) {
        fail("groups_shrink", "an inactive group became active".into());
    }
    if gained(&prev.active_dims, &next.active_dims) {
        fail("dims_shrink", "a resolved dimension became active".into());
    }
    if gained(&prev.active_arms, &next.active_arms) {
        fail("arms_shrink", "an eliminated arm became active".into());
    }
    if !prev.accepted.iter().all(|i| next.accepted.contains(i)) {
        fail("accepted_grows", "an accepted group was dropped".into());
    }
    for (idx, (a, b)) in prev.frozen.iter().zip(&next.frozen).enumerate() {
        if let Some(v) = a {
            if *b != Some(*v) {
                fail("frozen_adherence", format!("frozen entry {idx} changed"));
            }
            let i = idx / prev.n_dims;
            let d = idx % prev.n_dims;
            if next.estimate(i)[d] != *v {
                fail("frozen_adherence", format!("estimate of group {} dim {} moved", i + 1, d + 1));
            }
        }
    }
    out
}
