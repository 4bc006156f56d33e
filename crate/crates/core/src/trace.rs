//! Per-round audit events emitted by the elimination algorithms.
//!
//! Serialised as line-delimited JSON objects
//! `{"round": r, "event": "<kind>", "payload": {...}}` with 1-based group,
//! arm and dimension indices.

use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// Triple elimination dropped a group that looks dominated.
    RejectGroup { group: usize, efficiency: Vec<f64> },
    /// A (group, dimension) pair was resolved and its estimate frozen.
    ResolveDim { group: usize, dim: usize, value: f64 },
    /// Arm left the active set of one (group, dimension).
    EliminateArm { group: usize, dim: usize, arm: usize },
    /// Group was accepted into the output set.
    AcceptGroup { group: usize, efficiency: Vec<f64> },
    /// EECB dropped a group on its weighted score.
    EliminateGroup { group: usize, score: f64 },
    /// EECB dropped an arm from one dimension's active set.
    EliminateArmDim { group: usize, arm: usize, dim: usize },
    /// EECB focused a dimension; `counts` is the focus vector before the increment.
    FocusDim {
        dim: usize,
        counts: Vec<u64>,
        weighted_radius: f64,
        pulls: u64,
    },
    /// An active group had no arm left in the focused dimension.
    Anomaly { group: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub round: u64,
    pub event: TraceEvent,
}

impl TraceEvent {
    pub fn name(&self) -> &'static str {
        match self {
            TraceEvent::RejectGroup { .. } => "reject_group",
            TraceEvent::ResolveDim { .. } => "resolve_dim",
            TraceEvent::EliminateArm { .. } => "eliminate_arm",
            TraceEvent::AcceptGroup { .. } => "accept_group",
            TraceEvent::EliminateGroup { .. } => "eliminate_group",
            TraceEvent::EliminateArmDim { .. } => "eliminate_arm_dim",
            TraceEvent::FocusDim { .. } => "focus_dim",
            TraceEvent::Anomaly { .. } => "anomaly",
        }
    }

    fn payload(&self) -> Value {
        match self {
            TraceEvent::RejectGroup { group, efficiency } | TraceEvent::AcceptGroup { group, efficiency } => {
                json!({ "group": group + 1, "efficiency": efficiency })
            }
            TraceEvent::ResolveDim { group, dim, value } => {
                json!({ "group": group + 1, "dim": dim + 1, "value": value })
            }
            TraceEvent::EliminateArm { group, dim, arm } | TraceEvent::EliminateArmDim { group, arm, dim } => {
                json!({ "group": group + 1, "arm": arm + 1, "dim": dim + 1 })
            }
            TraceEvent::EliminateGroup { group, score } => json!({ "group": group + 1, "score": score }),
            TraceEvent::FocusDim {
                dim,
                counts,
                weighted_radius,
                pulls,
            } => json!({
                "dim": dim + 1,
                "counts": counts,
                "weighted_radius": weighted_radius,
                "pulls": pulls,
            }),
            TraceEvent::Anomaly { group, dim } => json!({ "group": group + 1, "dim": dim + 1 }),
        }
    }
}

impl TraceRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "round": self.round,
            "event": self.event.name(),
            "payload": self.event.payload(),
        })
    }
}

/// Renders a trace as newline-terminated JSON lines.
pub fn to_json_lines(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        out.push_str(&rec.to_json().to_string());
        out.push('\n');
    }
    out
}
