use riverguard_core::adversary::*;
use riverguard_core::model::*;
use riverguard_oracle::{
    adversary_brute, all_policies, feasible_policies, grid_adversary_single_edge, random_instance, structured_pairs,
    RandomSpec,
};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn tiny() -> NetworkInstance {
    NetworkInstance::new(&InstanceSpec {
        root: 0,
        budget: 1.0,
        nodes: vec![NodeSpec { id: 0, reward: 1.0 }, NodeSpec { id: 1, reward: 1.0 }],
        edges: vec![EdgeSpec {
            parent: 0,
            child: 1,
            actions: vec![Action::new(0.0, 0.2, 0.4), Action::new(1.0, 0.8, 1.0)],
        }],
    })
    .unwrap()
}

#[test]
fn tiny_examples() {
    let inst = tiny();
    let null = Policy::null(&inst);
    let repair = Policy::from_actions(vec![0, 1]);
    let r = solve_exact(&inst, &null, Objective::Ratio).unwrap();
    assert!(rel_close(r.value, 0.6, 1e-12));
    assert_eq!(r.policy.action(1), 1);
    assert_eq!(r.params.row(1), &[0.2, 1.0]);
    assert!(rel_close(solve_exact(&inst, &null, Objective::Regret).unwrap().value, 0.8, 1e-12));
    assert!(rel_close(solve_exact(&inst, &repair, Objective::Ratio).unwrap().value, 1.0, 1e-12));
    assert!(solve_exact(&inst, &repair, Objective::Regret).unwrap().value.abs() < 1e-12);
    let r = solve_rdp(&inst, &repair, Objective::Ratio, Rounding::Epsilon(0.1)).unwrap();
    assert!(r.value >= 1.0 - 1e-12 && r.value <= 1.1 + 1e-12);
}

#[test]
fn exact_matches_enumeration() {
    for seed in 0..120 {
        let spec = RandomSpec::new(2 + seed as usize % 7, 2);
        let inst = random_instance(seed, &spec);
        let oracle = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::default()).unwrap();
        let policies = feasible_policies(&inst);
        for pi in policies.iter().step_by((policies.len() / 3).max(1)) {
            let truth = adversary_brute(&inst, pi);
            let ratio = oracle.solve(pi, Objective::Ratio).unwrap();
            let regret = oracle.solve(pi, Objective::Regret).unwrap();
            assert!(rel_close(ratio.value, truth.min_ratio, 1e-9), "seed {seed}: {} vs {}", ratio.value, truth.min_ratio);
            assert!(rel_close(regret.value, truth.max_regret, 1e-9), "seed {seed}: {} vs {}", regret.value, truth.max_regret);
            for r in [&ratio, &regret] {
                assert!(riverguard_core::within_budget(r.cost, inst.budget()));
                r.params.check(&inst).unwrap();
                assert!(rel_close(r.value, r.table_value, 1e-9));
            }
        }
    }
}

#[test]
fn pruning_never_changes_the_optimum() {
    for seed in 0..60 {
        let inst = random_instance(seed, &RandomSpec::new(9, 3));
        let plain = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::default()).unwrap();
        let pruned = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::PRUNED).unwrap();
        let dominance =
            AdversaryOracle::new(&inst, Rounding::Exact, DpOptions { dominance_pruning: true, budget_pruning: false, hull_pruning: false })
                .unwrap();
        let pi = Policy::null(&inst);
        for obj in [Objective::Ratio, Objective::Regret] {
            let a = plain.solve(&pi, obj).unwrap().value;
            assert!(rel_close(a, pruned.solve(&pi, obj).unwrap().value, 1e-12));
            assert!(rel_close(a, dominance.solve(&pi, obj).unwrap().value, 1e-12));
        }
    }
}

#[test]
fn hull_pruning_keeps_the_exact_optimum() {
    for seed in 0..150 {
        let inst = random_instance(seed, &RandomSpec::new(3 + seed as usize % 8, 3));
        let plain = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::default()).unwrap();
        let hull = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::HULL).unwrap();
        let policies = all_policies(&inst);
        for pi in policies.iter().step_by((policies.len() / 4).max(1)) {
            for obj in [Objective::Ratio, Objective::Regret] {
                let a = plain.solve(pi, obj).unwrap();
                let b = hull.solve(pi, obj).unwrap();
                assert!(rel_close(a.value, b.value, 1e-9), "seed {seed} {obj:?}: {} vs {}", a.value, b.value);
                assert!(riverguard_core::within_budget(b.cost, inst.budget()));
            }
        }
    }
}

#[test]
fn hull_pruning_keeps_the_epsilon_bound() {
    for seed in 0..150 {
        let eps = [0.05, 0.1, 0.5][seed as usize % 3];
        let inst = random_instance(1000 + seed, &RandomSpec::new(4 + seed as usize % 9, 3));
        let exact = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::HULL).unwrap();
        let rdp = AdversaryOracle::new(&inst, Rounding::Epsilon(eps), DpOptions::HULL).unwrap();
        let policies = all_policies(&inst);
        for pi in policies.iter().step_by((policies.len() / 4).max(1)) {
            let opt = exact.solve(pi, Objective::Ratio).unwrap().value;
            let found = rdp.solve(pi, Objective::Ratio).unwrap();
            assert!(found.value >= opt - 1e-9);
            assert!(found.value <= (1.0 + eps) * opt + 1e-9, "seed {seed}: {} vs {opt}", found.value);
            assert!(found.value <= found.table_value + 1e-9);
            let worst = exact.solve(pi, Objective::Regret).unwrap().value;
            assert!(rdp.solve(pi, Objective::Regret).unwrap().value <= worst + 1e-9);
        }
    }
}

#[test]
fn root_table_costs_are_minimal() {
    for seed in 0..40 {
        let inst = random_instance(seed, &RandomSpec::new(2 + seed as usize % 7, 3).binary());
        for pi in all_policies(&inst).iter().take(3) {
            let tables = build_tables(&inst, pi, Objective::Ratio, Rounding::Exact, DpOptions::default()).unwrap();
            let pairs = structured_pairs(&inst, pi);
            for e in tables.root_table().entries() {
                let best = pairs
                    .iter()
                    .filter(|(za, zd, _)| rel_close(*za, e.adversary_value, 1e-9) && rel_close(*zd, e.decision_value, 1e-9))
                    .map(|t| t.2)
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(e.cost, best, "seed {seed}");
            }
            let mut distinct: Vec<(f64, f64)> = pairs.iter().map(|t| (t.0, t.1)).collect();
            distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
            distinct.dedup_by(|a, b| rel_close(a.0, b.0, 1e-9) && rel_close(a.1, b.1, 1e-9));
            assert!(tables.root_table().len() >= distinct.len());
        }
    }
}

#[test]
fn chain_root_table_matches_enumeration() {
    let two = vec![Action::new(0.0, 0.3, 0.6), Action::new(2.0, 0.7, 0.95)];
    let inst = NetworkInstance::new(&InstanceSpec {
        root: 0,
        budget: 10.0,
        nodes: vec![NodeSpec { id: 0, reward: 1.0 }, NodeSpec { id: 1, reward: 2.0 }, NodeSpec { id: 2, reward: 3.0 }],
        edges: vec![
            EdgeSpec { parent: 0, child: 1, actions: two.clone() },
            EdgeSpec { parent: 1, child: 2, actions: two },
        ],
    })
    .unwrap();
    for pi in all_policies(&inst) {
        let tables = build_tables(&inst, &pi, Objective::Ratio, Rounding::Exact, DpOptions::default()).unwrap();
        let pairs = structured_pairs(&inst, &pi);
        assert_eq!(pairs.len(), 9);
        assert_eq!(tables.root_table().len(), 9);
        let leaf = tables.table(2).entries();
        assert_eq!(leaf.len(), 1);
        assert_eq!((leaf[0].adversary_value, leaf[0].decision_value, leaf[0].cost), (3.0, 3.0, 0.0));
    }
}

#[test]
fn fptas_bound_and_rounding_inequalities() {
    let eps = 0.1;
    let mu = eps / (2.0 + eps);
    for seed in 0..30 {
        let inst = random_instance(seed, &RandomSpec::new(6 + seed as usize % 9, 3).binary());
        let pi = Policy::null(&inst);
        let exact = solve_with(&inst, &pi, Objective::Ratio, Rounding::Exact, DpOptions::PRUNED).unwrap();
        let rdp = solve_rdp(&inst, &pi, Objective::Ratio, Rounding::Epsilon(eps)).unwrap();
        assert!(rdp.value >= exact.value - 1e-9);
        assert!(rdp.value <= (1.0 + eps) * exact.value + 1e-9, "seed {seed}");

        for obj in [Objective::Ratio, Objective::Regret] {
            let tables = build_tables(&inst, &pi, obj, Rounding::Epsilon(eps), DpOptions::default()).unwrap();
            for (k, e) in tables.root_table().entries().iter().enumerate() {
                let (adv, params) = tables.reconstruct(&inst, k);
                let za = evaluate(&inst, &adv, &params).unwrap();
                let zd = evaluate(&inst, &pi, &params).unwrap();
                let (ha, hd) = (e.adversary_value, e.decision_value);
                let tol = 1e-9 * za.max(zd);
                match obj {
                    Objective::Ratio => {
                        assert!(ha <= za + tol && za - ha <= mu * za + tol);
                        assert!(hd >= zd - tol && hd - zd <= mu * zd + tol);
                    }
                    Objective::Regret => {
                        assert!(ha >= za - tol && ha - za <= mu * za + tol);
                        assert!(hd <= zd + tol && zd - hd <= mu * zd + tol);
                    }
                }
            }
        }
    }
}

#[test]
fn table_sizes_respect_the_bin_bound() {
    let eps = 0.2;
    let mu = eps / (2.0 + eps);
    for seed in 0..15 {
        let mut spec = RandomSpec::new(20, 3).binary();
        spec.zero_reward_prob = 0.0;
        let inst = random_instance(seed, &spec);
        let rewards: Vec<f64> = (0..inst.len()).map(|v| inst.reward(v)).collect();
        let (rmin, rmax) =
            rewards.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        let sizes = inst.subtree_sizes();
        let tables =
            build_tables(&inst, &Policy::null(&inst), Objective::Ratio, Rounding::Epsilon(eps), DpOptions::default())
                .unwrap();
        for v in 0..inst.len() {
            let bound = (1.0 + mu) * sizes[v] as f64 * rmax / (mu * rmin) + 1.0;
            let t = tables.table(v);
            assert!(t.distinct_adversary_values() as f64 <= bound);
            assert!(t.distinct_decision_values() as f64 <= bound);
            let k = t.grid().unwrap();
            for e in t.entries() {
                for x in [e.adversary_value / k, e.decision_value / k] {
                    assert!((x - x.round()).abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn endpoints_beat_interior_grid() {
    for seed in 0..30 {
        let mut spec = RandomSpec::new(2, 3);
        spec.budget_fraction = 1.0;
        let inst = random_instance(seed, &spec);
        for pi in all_policies(&inst) {
            let grid = grid_adversary_single_edge(&inst, &pi, 0.01);
            let ratio = solve_exact(&inst, &pi, Objective::Ratio).unwrap().value;
            let regret = solve_exact(&inst, &pi, Objective::Regret).unwrap().value;
            assert!(grid.min_ratio >= ratio - 1e-9);
            assert!(grid.max_regret <= regret + 1e-9);
        }
    }
}

#[test]
fn ratio_regret_identity_on_certificates() {
    for seed in 0..40 {
        let inst = random_instance(seed, &RandomSpec::new(10, 3));
        let oracle = AdversaryOracle::new(&inst, Rounding::Epsilon(0.1), DpOptions::default()).unwrap();
        let pi = Policy::null(&inst);
        for obj in [Objective::Ratio, Objective::Regret] {
            let r = oracle.solve(&pi, obj).unwrap();
            assert!(rel_close(r.ratio(), 1.0 - r.regret() / r.adversary_value, 1e-12));
        }
    }
}

#[test]
fn degenerate_intervals_and_zero_budget_give_ratio_one() {
    for seed in 0..20 {
        let inst = random_instance(seed, &RandomSpec::new(8, 3));
        let mut spec = inst.to_spec();
        spec.budget = 0.0;
        for e in &mut spec.edges {
            for a in &mut e.actions {
                a.p_high = a.p_low;
            }
        }
        let inst = NetworkInstance::new(&spec).unwrap();
        let oracle = AdversaryOracle::new(&inst, Rounding::Exact, DpOptions::default()).unwrap();
        let r = oracle.solve(&Policy::null(&inst), Objective::Ratio).unwrap();
        assert!(rel_close(r.value, 1.0, 1e-12));
        assert_eq!(r.cost, 0.0);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let inst = tiny();
    let pi = Policy::null(&inst);
    assert!(solve_rdp(&inst, &pi, Objective::Ratio, Rounding::Epsilon(0.0)).is_err());
    assert!(solve_rdp(&inst, &pi, Objective::Ratio, Rounding::Constant(-1.0)).is_err());
    assert!(solve_rdp(&inst, &pi, Objective::Ratio, Rounding::Exact).is_err());
    assert!(solve_exact(&inst, &Policy::from_actions(vec![0, 5]), Objective::Ratio).is_err());
    let wide = random_instance(3, &RandomSpec { max_children: Some(6), ..RandomSpec::new(12, 2) });
    if !wide.is_binary() {
        assert!(solve_exact(&wide, &Policy::null(&wide), Objective::Ratio).is_err());
    }
}
