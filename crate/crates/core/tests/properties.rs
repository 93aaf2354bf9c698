use std::collections::BTreeSet;

use pcl_assort::bench::{aggregate, run_experiment, ExperimentConfig, Method};
use pcl_assort::prelude::*;
use proptest::prelude::*;

fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n, any::<u64>(), 0.05f64..0.9, 0.02f64..0.5).prop_map(|(n, seed, kappa, beta)| {
        let mut cfg = GeneratorConfig::new(n, kappa, seed);
        cfg.beta = beta;
        generate_instance(&cfg)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_ranges(n in 2usize..60, kappa in 0.001f64..0.999, seed in any::<u64>(), int in any::<bool>()) {
        let cfg = GeneratorConfig { integer_weights: int, ..GeneratorConfig::new(n, kappa, seed) };
        let inst = generate_instance(&cfg);
        prop_assert!(inst.alpha().iter().all(|a| a.exp() > 0.0 && a.exp() <= 5.0));
        prop_assert!(inst.weights().iter().all(|w| (1.0..=10.0).contains(w)));
        prop_assert!(inst.gamma_upper().iter().all(|g| (0.1..=1.0).contains(g)));
        prop_assert_eq!(inst.capacity(), kappa * inst.weights().iter().sum::<f64>());
        prop_assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn exact_matches_oracle(inst in instance_strategy(11)) {
        let oracle = brute_force_oracle(&inst).unwrap();
        let r = branch_and_bound(&inst, &BnbConfig::default());
        prop_assert_eq!(r.a_value.to_bits(), oracle.a_value.to_bits());
        prop_assert_eq!(r.assortment, oracle.assortment);
    }

    #[test]
    fn heuristics_are_feasible_and_ordered(inst in instance_strategy(40), seed in any::<u64>()) {
        let g = greedy(&inst);
        let r = grasp(&inst, &GraspConfig { seed, ..GraspConfig::default() });
        prop_assert!(g.assortment.is_feasible(&inst));
        prop_assert!(r.assortment.is_feasible(&inst));
        prop_assert!(r.a_value >= g.a_value);
        prop_assert!(r.revenue >= g.revenue);
        prop_assert!((r.revenue - (r.price - 1.0 / inst.beta())).abs() < 1e-9 * r.price.max(1.0));
        prop_assert!(lp_relaxation(&inst).objective_value + 1e-9 * r.a_value.max(1.0) >= r.a_value);
    }

    #[test]
    fn exact_assortment_beats_uniform_price_perturbations(inst in instance_strategy(8), shift in -2.0f64..2.0) {
        let r = branch_and_bound(&inst, &BnbConfig::default());
        let n = inst.n();
        let p = PriceVector::uniform(n, (r.price + shift).max(0.0)).unwrap();
        prop_assert!(expected_revenue(&inst, &p, &r.assortment) <= r.revenue + 1e-9);
    }
}

#[test]
fn experiment_rows_follow_from_records() {
    let cfg = ExperimentConfig {
        grid: vec![(20, 0.06)],
        instances_per_combo: 25,
        master_seed: 3,
        ..ExperimentConfig::default()
    };
    let e = run_experiment(&cfg);
    assert_eq!(aggregate(&e.records), e.rows);
    let row = &e.rows[0];
    let (ex, gr, gd) = (
        row.exact_gap.unwrap(),
        row.grasp_gap.unwrap(),
        row.greedy_gap.unwrap(),
    );
    assert!(ex.avg <= gr.avg && gr.avg <= gd.avg);
    assert!(ex.max <= gr.max && gr.max <= gd.max);
    assert_eq!(row.exact_budget_hits, 0);
    let seeds: BTreeSet<u64> = e.records.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 25);
}

#[test]
fn method_subsets_only_run_what_is_asked() {
    let cfg = ExperimentConfig {
        grid: vec![(10, 0.2)],
        instances_per_combo: 2,
        methods: [Method::Greedy].into_iter().collect(),
        ..ExperimentConfig::default()
    };
    let e = run_experiment(&cfg);
    assert!(e
        .records
        .iter()
        .all(|r| r.greedy.is_some() && r.exact.is_none() && r.grasp.is_none()));
    // Gaps need the LP reference.
    assert!(e.rows[0].greedy_gap.is_none());
    assert!(e.rows[0].greedy_time.is_some());
}
