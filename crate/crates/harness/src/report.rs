//! JSON views of core reports for the command line: 1-based indices,
//! row-major tables nested as N×K arrays, infinities as the string `"inf"`.

use bgi_core::bounds::BoundReport;
use bgi_core::{GpsiGapReport, LbgiGapReport};
use serde_json::{json, Value};

use crate::runner::{Answer, RunOutcome};

pub fn num(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn one_based(v: &[usize]) -> Value {
    json!(v.iter().map(|i| i + 1).collect::<Vec<_>>())
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn table(v: &[f64], cols: usize) -> Value {
    Value::Array(v.chunks(cols.max(1)).map(nums).collect())
}

pub fn gpsi_gaps_json(r: &GpsiGapReport) -> Value {
    json!({
        "problem": "gpsi",
        "epsilon": r.epsilon,
        "pareto_set": one_based(&r.pareto_set),
        "group_gaps": nums(&r.group_gaps),
        "plus_gaps": Value::Array(r.plus_gaps.iter().map(|&x| opt(x)).collect()),
        "minus_gaps": Value::Array(r.minus_gaps.iter().map(|&x| opt(x)).collect()),
        "arm_gaps": table(&r.arm_gaps, r.n_arms),
        "effective_gaps": table(&r.effective_gaps, r.n_arms),
    })
}

pub fn lbgi_gaps_json(r: &LbgiGapReport) -> Value {
    json!({
        "problem": "lbgi",
        "weights": r.weights,
        "best_group": r.best_group + 1,
        "group_gaps": nums(&r.group_gaps),
        "arm_alphas": table(&r.arm_alphas, r.n_arms),
        "arm_gaps": table(&r.arm_gaps, r.n_arms),
        "refined_arm_gaps": table(&r.refined_arm_gaps, r.n_arms),
    })
}

pub fn bound_json(r: &BoundReport) -> Value {
    json!({
        "kind": r.kind,
        "total": num(r.total),
        "constant_used": r.constant_used,
        "log_confidence": opt(r.log_confidence),
        "per_arm_terms": table(&r.per_arm_terms, r.n_arms),
        "group_terms": nums(&r.group_terms),
        "notes": r.notes,
    })
}

pub fn outcome_json(algorithm: &str, out: &RunOutcome, n_arms: usize, correct: bool) -> Value {
    let recommended = match &out.answer {
        Answer::Set(v) => one_based(v),
        Answer::Single(i) => json!(i + 1),
    };
    let pulls: Vec<Value> = out.per_arm_pulls.chunks(n_arms.max(1)).map(|c| json!(c)).collect();
    json!({
        "algorithm": algorithm,
        "recommended": recommended,
        "total_pulls": out.total_pulls,
        "rounds": out.rounds,
        "per_arm_pulls": pulls,
        "correct": correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinities_become_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(0.5), json!(0.5));
        assert_eq!(table(&[1.0, f64::INFINITY, 2.0, 3.0], 2), json!([[1.0, "inf"], [2.0, 3.0]]));
        assert_eq!(one_based(&[0, 3]), json!([1, 4]));
    }
}
