use bgi_core::baselines::{run_tel, unis_pull_count};
use bgi_core::confidence::ConfidenceRadius;
use bgi_core::eecb::{eecb_schedule_property, eecb_state_invariant_check, eecb_step_check, Eecb, EecbConfig};
use bgi_core::gaps::best_weighted_group;
use bgi_core::oracle::brute_pareto;
use bgi_core::te::{run_te, te_progress_check, te_round_invariant_check, Phases, TeConfig, TripleElimination};
use bgi_core::{efficiency, gpsi_gaps, pareto_set, ArmMeansTensor, EfficiencyMatrix, Instance, NoiseModel, RngStream};
use proptest::prelude::*;

fn tensor(max_n: usize, max_k: usize, max_d: usize) -> impl Strategy<Value = ArmMeansTensor> {
    (1..=max_n, 1..=max_k, 1..=max_d).prop_flat_map(|(n, k, d)| {
        prop::collection::vec(0.0..1.0f64, n * k * d).prop_map(move |m| ArmMeansTensor::new(n, k, d, m).unwrap())
    })
}

fn instance(t: ArmMeansTensor, scale: f64) -> Instance {
    let noise = NoiseModel {
        scale,
        ..NoiseModel::standard_gaussian()
    };
    Instance::new(t, noise, "prop").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn te_invariants_hold_every_round(t in tensor(4, 3, 3), seed in any::<u64>(), noisy in any::<bool>()) {
        let inst = instance(t, if noisy { 1.0 } else { 0.0 });
        let truth = (!noisy).then_some(&inst.tensor);
        let cfg = TeConfig { max_rounds: 20_000, ..TeConfig::new(0.2, 0.1) };
        let mut rng = RngStream::new(seed, 0);
        let mut runner = TripleElimination::new(&inst, cfg, Phases::TE, &mut rng).unwrap();
        while !runner.is_finished() && runner.state().round < cfg.max_rounds {
            let prev = runner.state().clone();
            runner.step();
            let v = te_round_invariant_check(runner.state(), truth);
            prop_assert!(v.is_empty(), "{:?}", v);
            let v = te_progress_check(&prev, runner.state());
            prop_assert!(v.is_empty(), "{:?}", v);
        }
    }

    #[test]
    fn noiseless_te_is_exact_on_separated_instances(t in tensor(4, 3, 3)) {
        let eps = 0.05;
        let gaps = gpsi_gaps(&t, eps).unwrap();
        prop_assume!(gaps.min_group_gap() > 3.0 * eps);
        let inst = instance(t, 0.0);
        let res = run_te(&inst, TeConfig::new(0.1, eps), &mut RngStream::new(0, 0)).unwrap();
        prop_assert_eq!(res.recommended, gaps.pareto_set);
    }

    #[test]
    fn eecb_invariants_hold_every_round(
        t in tensor(4, 3, 3),
        w in prop::collection::vec(0.2..3.0f64, 3),
        seed in any::<u64>(),
        noisy in any::<bool>(),
    ) {
        let w = w[..t.n_dims()].to_vec();
        let r = efficiency(&t);
        let scores = r.weighted_scores(&w);
        let best = best_weighted_group(&r, &w);
        prop_assume!(best.is_ok());
        let best = best.unwrap();
        prop_assume!((0..t.n_groups()).all(|i| i == best || scores[best] - scores[i] > 0.05));

        let inst = instance(t, if noisy { 1.0 } else { 0.0 });
        let truth = (!noisy).then_some(&inst.tensor);
        let cfg = EecbConfig { max_rounds: 50_000, ..EecbConfig::new(w.clone(), 0.2).with_trace() };
        let mut rng = RngStream::new(seed, 0);
        let mut alg = Eecb::new(&inst, cfg.clone(), &mut rng).unwrap();
        prop_assert!(eecb_state_invariant_check(alg.state(), truth).is_empty());
        while !alg.is_finished() && alg.state().round <= cfg.max_rounds {
            let prev = alg.state().clone();
            alg.step();
            let v = eecb_state_invariant_check(alg.state(), truth);
            prop_assert!(v.is_empty(), "{:?}", v);
            let v = eecb_step_check(&prev, alg.state());
            prop_assert!(v.is_empty(), "{:?}", v);
        }
        if alg.is_finished() {
            let (n, k, d) = (inst.n_groups(), inst.n_arms(), inst.n_dims());
            let radius = ConfidenceRadius::new(n, k, d, 0.2, 1.0).unwrap();
            let res = alg.run().unwrap();
            let v = eecb_schedule_property(res.trace.as_ref().unwrap(), &w, &radius);
            prop_assert!(v.is_empty(), "{:?}", v);
            if !noisy {
                prop_assert_eq!(res.recommended, best);
            }
        }
    }

    #[test]
    fn tel_pulls_do_not_depend_on_weights(
        t in tensor(3, 2, 2),
        w1 in prop::collection::vec(0.2..3.0f64, 2),
        w2 in prop::collection::vec(0.2..3.0f64, 2),
        seed in any::<u64>(),
    ) {
        let d = t.n_dims();
        let inst = instance(t, 1.0);
        let cfg = TeConfig { max_rounds: 2_000, ..TeConfig::new(0.2, 0.5) };
        let a = run_tel(&inst, &w1[..d], cfg, &mut RngStream::new(seed, 1));
        let b = run_tel(&inst, &w2[..d], cfg, &mut RngStream::new(seed, 1));
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.per_arm_pulls, b.per_arm_pulls),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one run finished and the other did not"),
        }
    }

    #[test]
    fn pareto_matches_brute_force(
        rows in (1usize..15, 1usize..6).prop_flat_map(|(n, d)| prop::collection::vec(prop::collection::vec(0u8..4, d), n)),
        eps in prop::sample::select(vec![0.0, 0.25, 0.5]),
    ) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| f64::from(x) / 4.0).collect()).collect();
        let r = EfficiencyMatrix::from_rows(&rows).unwrap();
        prop_assert_eq!(pareto_set(&r, eps).unwrap(), brute_pareto(&r, eps));
    }

    #[test]
    fn unis_pull_count_grows_as_accuracy_tightens(
        n in 1usize..10, k in 1usize..10, d in 1usize..5,
        eps in 0.01..0.5f64, delta in 0.001..0.5f64,
    ) {
        let a = unis_pull_count(n, k, d, eps, delta).unwrap();
        let b = unis_pull_count(n, k, d, eps / 2.0, delta).unwrap();
        let c = unis_pull_count(n, k, d, eps, delta / 2.0).unwrap();
        prop_assert!(b >= 3 * a);
        prop_assert!(c >= a);
    }
}

#[test]
fn same_stream_same_run() {
    let t = ArmMeansTensor::from_nested(&[
        vec![vec![0.9, 0.2], vec![0.3, 0.6]],
        vec![vec![0.4, 0.4], vec![0.1, 0.1]],
        vec![vec![0.2, 0.95], vec![0.0, 0.3]],
    ])
    .unwrap();
    let inst = instance(t, 1.0);
    let cfg = TeConfig::new(0.1, 0.05);
    let a = run_te(&inst, cfg, &mut RngStream::new(9, 4)).unwrap();
    let b = run_te(&inst, cfg, &mut RngStream::new(9, 4)).unwrap();
    let c = run_te(&inst, cfg, &mut RngStream::new(9, 5)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.per_arm_pulls, c.per_arm_pulls);
}
