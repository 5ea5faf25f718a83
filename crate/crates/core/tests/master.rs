use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riverguard_core::adversary::Objective;
use riverguard_core::master::*;
use riverguard_core::model::*;
use riverguard_oracle::{feasible_policies, master_brute, random_instance, BruteScenario, RandomSpec};

fn random_scenario(inst: &NetworkInstance, rng: &mut ChaCha8Rng) -> Scenario {
    let feasible = feasible_policies(inst);
    let pi = feasible[rng.random_range(0..feasible.len())].clone();
    let mut p = ParamVector::midpoints(inst);
    for v in inst.edges() {
        let row = inst
            .actions(v)
            .iter()
            .map(|a| match rng.random_range(0..3) {
                0 => a.p_low,
                1 => a.p_high,
                _ => a.p_low + rng.random::<f64>() * (a.p_high - a.p_low),
            })
            .collect();
        p.set_row(v, row);
    }
    Scenario::new(inst, pi, p).unwrap()
}

fn brute(inst: &NetworkInstance, set: &ScenarioSet, obj: Objective) -> f64 {
    let s: Vec<BruteScenario<'_>> =
        set.iter().map(|s| BruteScenario { params: &s.params, adversary_value: s.value }).collect();
    let best = master_brute(inst, &s, obj == Objective::Ratio);
    match obj {
        Objective::Ratio => best,
        Objective::Regret => -best,
    }
}

#[test]
fn master_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..150 {
        let mut spec = RandomSpec::new(2 + seed as usize % 10, 3);
        spec.budget_fraction = rng.random_range(0.0..1.0);
        let inst = random_instance(seed, &spec);
        let mut set = ScenarioSet::new();
        for _ in 0..rng.random_range(1..5) {
            set.push(random_scenario(&inst, &mut rng)).unwrap();
        }
        for obj in [Objective::Ratio, Objective::Regret] {
            let r = solve_master(&inst, &set, obj).unwrap();
            let truth = brute(&inst, &set, obj);
            assert!((r.value - truth).abs() <= 1e-9 * truth.abs().max(1.0), "seed {seed} {obj:?}: {} vs {truth}", r.value);
            assert!(riverguard_core::within_budget(r.cost, inst.budget()));
            let values: Vec<f64> = set.iter().map(|s| evaluate(&inst, &r.policy, &s.params).unwrap()).collect();
            assert_eq!(values, r.scenario_values);
            assert_eq!(worst_case(obj, &set, &values), r.value);
        }
    }
}

#[test]
fn value_never_improves_as_scenarios_are_added() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for seed in 0..40 {
        let inst = random_instance(seed, &RandomSpec::new(10, 3));
        let mut set = ScenarioSet::new();
        let (mut ratio, mut regret) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..5 {
            set.push(random_scenario(&inst, &mut rng)).unwrap();
            let r = solve_master(&inst, &set, Objective::Ratio).unwrap().value;
            let g = solve_master(&inst, &set, Objective::Regret).unwrap().value;
            assert!(r <= ratio + 1e-12);
            assert!(g >= regret - 1e-12);
            (ratio, regret) = (r, g);
        }
    }
}

#[test]
fn dominated_scenarios_do_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed in 0..30 {
        let inst = random_instance(seed, &RandomSpec::new(8, 2));
        let strong = random_scenario(&inst, &mut rng);
        let mut weak = random_scenario(&inst, &mut rng);
        if weak.policy == strong.policy && weak.params == strong.params {
            continue;
        }
        // Any z lies in [r_s, Σ r], so this target makes every ratio against
        // `weak` at least the ratio against `strong`.
        weak.value = inst.reward(inst.root()) * strong.value / inst.total_reward();
        let mut one = ScenarioSet::new();
        one.push(strong.clone()).unwrap();
        let mut both = ScenarioSet::new();
        both.push(weak).unwrap();
        both.push(strong).unwrap();
        let a = solve_master(&inst, &one, Objective::Ratio).unwrap();
        let b = solve_master(&inst, &both, Objective::Ratio).unwrap();
        assert_eq!(a.policy, b.policy);
        assert!((a.value - b.value).abs() < 1e-12);
    }
}

#[test]
fn degenerate_single_scenario_is_the_point_problem() {
    for seed in 0..30 {
        let inst = random_instance(seed, &RandomSpec::new(4, 2));
        let params = ParamVector::lower_bounds(&inst);
        let set = ScenarioSet::from_scenarios(
            &inst,
            vec![Scenario { policy: Policy::null(&inst), value: evaluate(&inst, &Policy::null(&inst), &params).unwrap(), params: params.clone() }],
        )
        .unwrap();
        let r = solve_master(&inst, &set, Objective::Regret).unwrap();
        let best = feasible_policies(&inst)
            .iter()
            .map(|p| evaluate(&inst, p, &params).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((r.scenario_values[0] - best).abs() < 1e-12);
    }
}
