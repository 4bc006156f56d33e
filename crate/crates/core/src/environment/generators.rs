//! Random and constructed instance families.
//!
//! The constrained random families use rejection sampling: candidate tensors
//! with i.i.d. uniform entries are drawn until one meets the requested
//! structure, or the attempt budget runs out.

use rand::Rng;

use crate::environment::{Instance, NoiseModel};
use crate::error::{Error, Result};
use crate::gaps::{best_weighted_group, gpsi_gaps, validate_weights};
use crate::pareto::pareto_set;
use crate::tensor::{efficiency, ArmMeansTensor};

pub const DEFAULT_ATTEMPT_BUDGET: u64 = 100_000;

/// Default parameters of the hard two-optimal-group family.
pub const HARD_DEFAULTS: [f64; 5] = [0.9, 0.7, 0.7, 0.3, 0.1];

fn check_sizes(n: usize, k: usize, d: usize) -> Result<()> {
    if n == 0 || k == 0 || d == 0 {
        return Err(Error::arg(format!("N, K, D must be positive, got {n}, {k}, {d}")));
    }
    Ok(())
}

fn uniform_tensor<R: Rng + ?Sized>(n: usize, k: usize, d: usize, rng: &mut R) -> ArmMeansTensor {
    let means = (0..n * k * d).map(|_| rng.random::<f64>()).collect();
    ArmMeansTensor::new(n, k, d, means).expect("uniform draws lie in [0, 1)")
}

/// Random instance with exactly `pareto_count` Pareto-optimal groups and
/// every group gap strictly above `3 * epsilon`.
pub fn gen_random_gpsi<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    pareto_count: usize,
    epsilon: f64,
    budget: u64,
    rng: &mut R,
) -> Result<Instance> {
    check_sizes(n, k, d)?;
    if pareto_count == 0 || pareto_count > n {
        return Err(Error::arg(format!("pareto_count must lie in 1..={n}, got {pareto_count}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut wrong_count = 0u64;
    let mut small_gap = 0u64;
    let mut best_gap_seen = f64::NEG_INFINITY;
    for _ in 0..budget {
        let tensor = uniform_tensor(n, k, d, rng);
        match gpsi_check(&tensor, pareto_count, epsilon) {
            GpsiCheck::WrongCount => wrong_count += 1,
            GpsiCheck::SmallGap(g) => {
                small_gap += 1;
                best_gap_seen = best_gap_seen.max(g);
            }
            GpsiCheck::Ok => return gpsi_instance(tensor, pareto_count),
        }
    }
    Err(Error::GenerationFailed {
        attempts: budget,
        diagnostics: format!(
            "{wrong_count} candidates had the wrong Pareto-set size, {small_gap} had minimum gap <= {} \
             (largest seen {best_gap_seen:.4})",
            3.0 * epsilon
        ),
    })
}

enum GpsiCheck {
    Ok,
    WrongCount,
    SmallGap(f64),
}

fn gpsi_check(tensor: &ArmMeansTensor, pareto_count: usize, epsilon: f64) -> GpsiCheck {
    if pareto_set(&efficiency(tensor), 0.0).expect("epsilon 0 is valid").len() != pareto_count {
        return GpsiCheck::WrongCount;
    }
    let min_gap = gpsi_gaps(tensor, epsilon).expect("epsilon checked").min_group_gap();
    if min_gap > 3.0 * epsilon {
        GpsiCheck::Ok
    } else {
        GpsiCheck::SmallGap(min_gap)
    }
}

fn gpsi_instance(tensor: ArmMeansTensor, pareto_count: usize) -> Result<Instance> {
    let label = format!(
        "gpsi-N{}-K{}-D{}-p{pareto_count}",
        tensor.n_groups(),
        tensor.n_arms(),
        tensor.n_dims()
    );
    Instance::new(tensor, NoiseModel::standard_gaussian(), label)
}

/// A tensor meeting the [`gen_random_gpsi`] constraints, built directly:
/// optimal groups trade off along the first two objectives and every other
/// group sits just over `3 eps` below the first optimal group. All arms of a
/// group share its efficiency vector.
fn gpsi_seed_tensor(n: usize, k: usize, d: usize, pareto_count: usize, epsilon: f64) -> Option<ArmMeansTensor> {
    let step = 3.0 * epsilon + 0.01;
    let top = 0.99;
    let p = pareto_count;
    if d == 1 && p > 1 {
        return None;
    }
    let lo = top - step * (p - 1) as f64;
    let mut rows = Vec::with_capacity(n);
    for i in 0..p {
        let mut row = vec![top; d];
        if d > 1 {
            row[0] = top - step * i as f64;
            row[1] = lo + step * i as f64;
        }
        rows.push(row);
    }
    let dominated: Vec<f64> = rows[0].iter().map(|x| x - step).collect();
    if dominated.iter().any(|&x| x < 0.0) {
        return None;
    }
    rows.extend(std::iter::repeat_n(dominated, n - p));
    let means = rows.iter().flat_map(|r| std::iter::repeat_n(r.iter().copied(), k).flatten()).collect();
    let tensor = ArmMeansTensor::new(n, k, d, means).ok()?;
    matches!(gpsi_check(&tensor, p, epsilon), GpsiCheck::Ok).then_some(tensor)
}

/// Same constraints as [`gen_random_gpsi`], for regimes where plain
/// rejection essentially never succeeds.
///
/// Runs a Metropolis chain whose stationary law is the uniform distribution
/// on the feasible tensors: starting from a constructed feasible tensor,
/// each of `steps` proposals redraws one arm (or, one time in five, a whole
/// group) uniformly and is kept only if the constraints still hold.
pub fn gen_random_gpsi_mcmc<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    pareto_count: usize,
    epsilon: f64,
    steps: u64,
    rng: &mut R,
) -> Result<Instance> {
    check_sizes(n, k, d)?;
    if pareto_count == 0 || pareto_count > n {
        return Err(Error::arg(format!("pareto_count must lie in 1..={n}, got {pareto_count}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let Some(start) = gpsi_seed_tensor(n, k, d, pareto_count, epsilon) else {
        return Err(Error::GenerationFailed {
            attempts: 0,
            diagnostics: format!("no feasible starting tensor for pareto_count {pareto_count} and gap > {}", 3.0 * epsilon),
        });
    };
    let mut means = start.as_slice().to_vec();
    for _ in 0..steps {
        let group = rng.random_range(0..n);
        let arms = if rng.random_range(0..5) == 0 {
            0..k
        } else {
            let j = rng.random_range(0..k);
            j..j + 1
        };
        let span = (group * k + arms.start) * d..(group * k + arms.end) * d;
        let old: Vec<f64> = means[span.clone()].to_vec();
        for x in &mut means[span.clone()] {
            *x = rng.random::<f64>();
        }
        let candidate = ArmMeansTensor::new(n, k, d, means.clone()).expect("uniform draws lie in [0, 1)");
        if !matches!(gpsi_check(&candidate, pareto_count, epsilon), GpsiCheck::Ok) {
            means[span].copy_from_slice(&old);
        }
    }
    gpsi_instance(ArmMeansTensor::new(n, k, d, means)?, pareto_count)
}

/// Random instance whose weighted-best group is unique with gap at least
/// `delta_min` under every weight vector in `weight_sets`.
pub fn gen_random_lbgi_multi<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    weight_sets: &[Vec<f64>],
    delta_min: f64,
    budget: u64,
    rng: &mut R,
) -> Result<Instance> {
    check_sizes(n, k, d)?;
    if weight_sets.is_empty() {
        return Err(Error::arg("at least one weight vector is required"));
    }
    for w in weight_sets {
        validate_weights(w, d)?;
    }
    if !(delta_min > 0.0) {
        return Err(Error::arg(format!("delta_min must be positive, got {delta_min}")));
    }
    let mut ties = 0u64;
    let mut small_gap = 0u64;
    for _ in 0..budget {
        let tensor = uniform_tensor(n, k, d, rng);
        let r = efficiency(&tensor);
        let mut ok = true;
        for w in weight_sets {
            let best = match best_weighted_group(&r, w) {
                Ok(b) => b,
                Err(Error::NonUniqueOptimum { .. }) => {
                    ties += 1;
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            };
            let scores = r.weighted_scores(w);
            let w_norm: f64 = w.iter().sum();
            let gap = (0..n)
                .filter(|&i| i != best)
                .map(|i| (scores[best] - scores[i]) / w_norm)
                .fold(f64::INFINITY, f64::min);
            if gap < delta_min {
                small_gap += 1;
                ok = false;
                break;
            }
        }
        if ok {
            let label = format!("lbgi-N{n}-K{k}-D{d}");
            return Instance::new(tensor, NoiseModel::standard_gaussian(), label);
        }
    }
    Err(Error::GenerationFailed {
        attempts: budget,
        diagnostics: format!("{ties} candidates had tied best groups, {small_gap} had best-group gap < {delta_min}"),
    })
}

pub fn gen_random_lbgi<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    weights: &[f64],
    delta_min: f64,
    budget: u64,
    rng: &mut R,
) -> Result<Instance> {
    gen_random_lbgi_multi(n, k, d, &[weights.to_vec()], delta_min, budget, rng)
}

/// Checks the constraints of the hard family; the error names the first
/// violated inequality.
pub fn validate_hard_params(a: &[f64; 5], epsilon: f64) -> Result<()> {
    let [a1, a2, a3, a4, a5] = *a;
    if let Some((idx, v)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
        return Err(Error::arg(format!("a{} = {v} must lie in (0, 1)", idx + 1)));
    }
    let checks: [(bool, &str); 7] = [
        (a1 > a2, "a1 > a2"),
        (a3 > epsilon, "a3 > epsilon"),
        (a3 - a5 > a2 - a4, "a3 - a5 > a2 - a4"),
        (a2 - a4 > epsilon, "a2 - a4 > epsilon"),
        (a1 - a2 < 2.0 * (a2 - a4), "a1 - a2 < 2 (a2 - a4)"),
        (a2 > 2.0 * a4, "a2 > 2 a4"),
        (a1 < 2.0 * a2, "a1 < 2 a2"),
    ];
    for (ok, name) in checks {
        if !ok {
            return Err(Error::arg(format!(
                "hard-instance constraint violated: {name} (a = {a:?}, epsilon = {epsilon})"
            )));
        }
    }
    Ok(())
}

/// Two Pareto-optimal groups with mirrored efficiency vectors
/// `(a1, a2, a3, ..)` and `(a2, a1, a3, ..)`, and `N - 2` dominated groups
/// with efficiency `(a4, a4, a5, ..)`. All arms are fully dependent with
/// unit Gaussian noise.
///
/// Arm means are uniform below the group's efficiency vector (and above
/// `2 a2 - a1` in the first two objectives for the optimal groups); then arm
/// `d mod K` is pinned to the maximum of objective `d`.
pub fn gen_hard_gpsi<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    d: usize,
    epsilon: f64,
    a: [f64; 5],
    rng: &mut R,
) -> Result<Instance> {
    if n < 3 || d < 3 || k == 0 {
        return Err(Error::arg(format!("hard family needs N >= 3, D >= 3, K >= 1; got {n}, {k}, {d}")));
    }
    validate_hard_params(&a, epsilon)?;
    let [a1, a2, a3, a4, a5] = a;
    let target = |i: usize, dim: usize| -> f64 {
        match (i, dim) {
            (0, 0) | (1, 1) => a1,
            (0, 1) | (1, 0) => a2,
            (0 | 1, _) => a3,
            (_, 0 | 1) => a4,
            _ => a5,
        }
    };
    let floor_optimal = 2.0 * a2 - a1;
    let mut means = vec![0.0; n * k * d];
    for i in 0..n {
        for j in 0..k {
            for dim in 0..d {
                let top = target(i, dim);
                let floor = if i < 2 && dim < 2 { floor_optimal } else { 0.0 };
                // 1 - U lies in (0, 1], so the draw lies in (floor, top].
                let u = 1.0 - rng.random::<f64>();
                means[(i * k + j) * d + dim] = floor + (top - floor) * u;
            }
        }
        for dim in 0..d {
            means[(i * k + dim % k) * d + dim] = target(i, dim);
        }
    }
    let tensor = ArmMeansTensor::new(n, k, d, means)?;
    Instance::new(tensor, NoiseModel::fully_dependent(), format!("hard-N{n}-K{k}-D{d}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{NoiseKind, RngStream};
    use crate::gaps::lbgi_gaps;

    #[test]
    fn random_gpsi_meets_constraints() {
        let mut rng = RngStream::new(2024, 0);
        let inst = gen_random_gpsi(5, 6, 3, 2, 0.01, DEFAULT_ATTEMPT_BUDGET, &mut rng).unwrap();
        let r = efficiency(&inst.tensor);
        assert_eq!(pareto_set(&r, 0.0).unwrap().len(), 2);
        assert!(gpsi_gaps(&inst.tensor, 0.01).unwrap().min_group_gap() > 0.03);
        assert_eq!(inst.noise, NoiseModel::standard_gaussian());
    }

    #[test]
    fn mcmc_gpsi_meets_infeasible_for_rejection_constraints() {
        for (n, p) in [(3, 1), (4, 2), (5, 2), (10, 3)] {
            let inst = gen_random_gpsi_mcmc(n, 6, 3, p, 0.05, 5_000, &mut RngStream::new(7, 0)).unwrap();
            assert_eq!(pareto_set(&efficiency(&inst.tensor), 0.0).unwrap().len(), p);
            assert!(gpsi_gaps(&inst.tensor, 0.05).unwrap().min_group_gap() > 0.15);
            // The chain moved away from the constructed start.
            assert!(inst.tensor.as_slice().iter().any(|&x| x != 0.99 && x != 0.99 - 0.16));
        }
        let a = gen_random_gpsi_mcmc(4, 6, 3, 2, 0.05, 2_000, &mut RngStream::new(1, 0)).unwrap();
        let b = gen_random_gpsi_mcmc(4, 6, 3, 2, 0.05, 2_000, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(a, b);
        assert!(gen_random_gpsi_mcmc(3, 2, 1, 2, 0.05, 10, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn random_gpsi_single_group() {
        let mut rng = RngStream::new(1, 0);
        let inst = gen_random_gpsi(1, 3, 2, 1, 0.05, 1, &mut rng).unwrap();
        assert_eq!(inst.n_groups(), 1);
    }

    #[test]
    fn random_gpsi_is_deterministic() {
        let a = gen_random_gpsi(4, 3, 2, 2, 0.02, 10_000, &mut RngStream::new(77, 0)).unwrap();
        let b = gen_random_gpsi(4, 3, 2, 2, 0.02, 10_000, &mut RngStream::new(77, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_gpsi_budget_exhaustion() {
        // A gap above 1/3 * 3 = 1 is impossible with means in [0, 1].
        let err = gen_random_gpsi(3, 2, 2, 1, 0.4, 50, &mut RngStream::new(0, 0)).unwrap_err();
        match err {
            Error::GenerationFailed { attempts, diagnostics } => {
                assert_eq!(attempts, 50);
                assert!(diagnostics.contains("minimum gap"), "{diagnostics}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_gpsi_argument_errors() {
        let mut rng = RngStream::new(0, 0);
        assert!(gen_random_gpsi(3, 2, 2, 0, 0.1, 10, &mut rng).is_err());
        assert!(gen_random_gpsi(3, 2, 2, 4, 0.1, 10, &mut rng).is_err());
        assert!(gen_random_gpsi(3, 2, 2, 1, 0.0, 10, &mut rng).is_err());
    }

    #[test]
    fn random_lbgi_meets_constraints() {
        let mut rng = RngStream::new(5, 0);
        let w = [1.0, 1.0, 1.0];
        let inst = gen_random_lbgi(5, 5, 3, &w, 0.02, DEFAULT_ATTEMPT_BUDGET, &mut rng).unwrap();
        let g = lbgi_gaps(&inst.tensor, &w).unwrap();
        assert!(g.group_gaps[g.best_group] >= 0.02);
    }

    #[test]
    fn random_lbgi_single_group_accepted_immediately() {
        let mut rng = RngStream::new(5, 0);
        let inst = gen_random_lbgi(1, 2, 2, &[1.0, 1.0], 0.5, 1, &mut rng).unwrap();
        assert_eq!(lbgi_gaps(&inst.tensor, &[1.0, 1.0]).unwrap().best_group, 0);
    }

    #[test]
    fn random_lbgi_candidates_do_not_depend_on_weights() {
        // With a tiny delta_min the first candidate is accepted for both
        // weight vectors, so both see the same draw.
        let a = gen_random_lbgi(3, 2, 2, &[1.0, 1.0], 1e-9, 10, &mut RngStream::new(8, 0)).unwrap();
        let b = gen_random_lbgi(3, 2, 2, &[1.0, 5.0], 1e-9, 10, &mut RngStream::new(8, 0)).unwrap();
        assert_eq!(a.tensor, b.tensor);
    }

    #[test]
    fn hard_defaults_are_valid() {
        let mut rng = RngStream::new(3, 0);
        let inst = gen_hard_gpsi(4, 3, 3, 0.05, HARD_DEFAULTS, &mut rng).unwrap();
        assert_eq!(inst.noise.kind, NoiseKind::FullyDependent);
        assert_eq!(inst.noise.scale, 1.0);
        let r = efficiency(&inst.tensor);
        assert_eq!(r.row(0), &[0.9, 0.7, 0.7]);
        assert_eq!(r.row(1), &[0.7, 0.9, 0.7]);
        assert_eq!(r.row(2), &[0.3, 0.3, 0.1]);
        let g = gpsi_gaps(&inst.tensor, 0.05).unwrap();
        assert_eq!(g.pareto_set, vec![0, 1]);
        assert!((g.group_gaps[0] - 0.2).abs() < 1e-12);
        assert!((g.group_gaps[1] - 0.2).abs() < 1e-12);
        assert_eq!(pareto_set(&r, 0.05).unwrap(), vec![0, 1]);
        for i in 0..2 {
            for j in 0..3 {
                for dim in 0..2 {
                    assert!(inst.tensor.mean(i, j, dim) > 2.0 * 0.7 - 0.9);
                }
            }
        }
    }

    #[test]
    fn hard_boundary_is_rejected() {
        let err = gen_hard_gpsi(3, 2, 3, 0.05, [0.9, 0.6, 0.7, 0.3, 0.1], &mut RngStream::new(0, 0)).unwrap_err();
        assert!(err.to_string().contains("a2 > 2 a4"), "{err}");
        assert!(gen_hard_gpsi(2, 2, 3, 0.05, HARD_DEFAULTS, &mut RngStream::new(0, 0)).is_err());
        assert!(gen_hard_gpsi(3, 2, 2, 0.05, HARD_DEFAULTS, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn hard_single_arm_equals_efficiency() {
        let inst = gen_hard_gpsi(3, 1, 4, 0.05, HARD_DEFAULTS, &mut RngStream::new(0, 0)).unwrap();
        let r = efficiency(&inst.tensor);
        for i in 0..3 {
            assert_eq!(inst.tensor.arm(i, 0), r.row(i));
        }
    }
}
