//! Best group identification in multi-objective multi-armed bandits.
//!
//! Arms are partitioned into groups; a group is judged by its efficiency
//! vector, the per-objective maximum of its arms' mean rewards. Two problems
//! are supported:
//!
//! * Pareto-set identification over groups, solved by [`te::run_te`]
//!   (triple elimination over groups, objectives and arms), with the
//!   [`baselines`] AGE, GE and uniform sampling for comparison.
//! * Weighted best-group identification, solved by [`eecb::run_eecb`]
//!   (equal-effect confidence bounds), with the TEL baseline.
//!
//! [`gaps`] and [`bounds`] evaluate the instance-dependent hardness
//! quantities and sample-complexity expressions; [`oracle`] holds brute-force
//! reference implementations used by the test suites.

// `!(x > 0.0)` is how argument checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bounds;
pub mod confidence;
pub mod eecb;
pub mod environment;
pub mod error;
pub mod gaps;
pub mod oracle;
pub mod pareto;
pub mod te;
pub mod tensor;
pub mod trace;
pub mod vector;

pub use confidence::{beta, ConfidenceRadius};
pub use environment::{Instance, NoiseKind, NoiseModel, RngStream};
pub use error::{Error, PartialRun, Result};
pub use gaps::{gpsi_gaps, lbgi_gaps, GpsiGapReport, LbgiGapReport};
pub use pareto::pareto_set;
pub use tensor::{efficiency, ArmMeansTensor, EfficiencyMatrix};
pub use vector::{big_m_gap, dominance, m_gap, Dominance, RewardVector};
