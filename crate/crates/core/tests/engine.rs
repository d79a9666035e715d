//! Cross-module behavior on the built-in worlds: plan-operator semantics,
//! item values, affordance monotonicity, Bellman boundaries, life-long
//! consistency and remapping.

use spa_core::empowerment::EmpowermentVariant;
use spa_core::feasibility::feasibility_iteration;
use spa_core::hierarchy::StateVec;
use spa_core::lifelong::{
    believed_ontology, expected_valence_with_priors, observe_transformation, remap, FeatureSet,
};
use spa_core::model::{Availability, TgMdp};
use spa_core::planning::{affordance_set, item_value, plan_operator, valence, Evaluator};
use spa_core::scenario::load_scenario;
use spa_core::vbe::{hsm_vbe_solve, vbe_solve};

#[test]
fn empty_plan_is_a_point_mass_at_the_start() {
    let s = load_scenario("mountain_key").unwrap();
    let env = &s.envs[0];
    let dist = plan_operator(&env.ontology, &env.start, &[]).unwrap();
    assert_eq!(dist.len(), 1);
    assert_eq!(dist[0].0, env.start);
    assert!((dist[0].1 - 1.0).abs() < 1e-12);
}

#[test]
fn infeasible_middle_policy_self_maps_and_continues() {
    let s = load_scenario("mountain_key").unwrap();
    let env = &s.envs[0];
    let ont = &env.ontology;
    let drink = ont.goal_index("drink").unwrap();
    let eat = ont.goal_index("eat").unwrap();
    // Pre-key, eating is infeasible: the middle policy self-maps, takes
    // one step (drifting off the lake under its tie-broken action), and
    // the rest of the plan still executes.
    let with_failure = plan_operator(ont, &env.start, &[drink, eat, drink]).unwrap();
    assert_eq!(with_failure.len(), 1);
    let leaf = &with_failure[0].0;
    // drink: 1 travel + 1 step; failed eat: 1 step; drink: 1 travel + 1 step.
    assert_eq!(leaf.t, env.start.t + 5);
    assert_eq!(leaf.x, env.cells["lake"]);
    assert_eq!(leaf.comps[0], 19); // hydration re-topped by the last drink
}

#[test]
fn plan_that_returns_to_the_start_has_zero_valence() {
    let s = load_scenario("mountain_key").unwrap();
    let env = &s.envs[0];
    let eval = Evaluator::new(&env.ontology, 2, EmpowermentVariant::MarginalBase, None);
    // An empty plan trivially keeps state and operator unchanged.
    let v = valence(&eval, &eval, &env.start, &[]).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn item_value_requires_single_component_difference() {
    let s = load_scenario("mountain_key").unwrap();
    let env = &s.envs[0];
    let eval = Evaluator::new(&env.ontology, 3, EmpowermentVariant::TaskSpace, Some(vec![0, 1]));
    let mut both = env.start.clone();
    both.comps[0] -= 1;
    both.comps[2] = 1;
    assert!(item_value(&eval, &both, &env.start).is_err());
}

#[test]
fn losing_an_item_is_worth_negative_bits() {
    let s = load_scenario("mountain_key").unwrap();
    let env = &s.envs[0];
    let subset: Vec<usize> = ["drink", "eat"]
        .iter()
        .map(|g| env.ontology.goal_index(g).unwrap())
        .collect();
    let eval = Evaluator::new(&env.ontology, 3, EmpowermentVariant::TaskSpace, Some(subset));
    let without = env.start.clone();
    let mut with = env.start.clone();
    with.comps[2] = 1;
    // Valuing the keyless state against the keyed one: closing the door
    // removes reachable futures.
    let v = item_value(&eval, &without, &with).unwrap();
    assert!(v < 0.0, "losing the key should cost bits, got {v}");
}

#[test]
fn affordances_only_grow_when_the_door_opens() {
    let s = load_scenario("mountain_key").unwrap();
    let ont = &s.envs[0].ontology;
    for goal in 0..ont.goals.len() {
        let aff = affordance_set(ont, goal, 0).unwrap();
        let closed: std::collections::BTreeSet<_> = aff.per_mode[0].iter().collect();
        let open: std::collections::BTreeSet<_> = aff.per_mode[1].iter().collect();
        assert!(closed.is_subset(&open), "goal {goal} lost afforded states");
    }
}

#[test]
fn vbe_zero_horizon_is_identically_zero() {
    let op = spa_core::model::make_gridworld(3, 3, &[], false).unwrap();
    let sol = vbe_solve(&op, 2, 0).unwrap();
    for s in 0..op.num_states {
        assert_eq!(sol.value_at(s, 0), 0.0);
    }
}

#[test]
fn hsm_vbe_zero_abstract_horizon_is_zero() {
    let s = load_scenario("mountain_key").unwrap();
    let env = &s.envs[0];
    let sol = hsm_vbe_solve(&env.ontology, &env.start, 0, 3, None, None).unwrap();
    assert_eq!(sol.value_at(&env.start, 0), 0.0);
}

#[test]
fn priors_reduce_to_plain_valence_once_everything_is_known() {
    let s = load_scenario("stoffel_transfer").unwrap();
    let env2 = &s.envs[1];
    let mut knowledge = FeatureSet::default();
    knowledge.features = env2.features.features.clone();
    for (feature, goal) in [
        ("lake", "drink_a"),
        ("apple_tree", "eat_a"),
        ("dwarf_key", "key"),
        ("hammie", "mate"),
    ] {
        let gi = env2.ontology.goal_index(goal).unwrap();
        let psi = observe_transformation(&env2.ontology, gi, feature).unwrap();
        knowledge.bindings.insert(feature.into(), psi);
        knowledge.known.insert(feature.into());
    }
    let believed = believed_ontology(&env2.ontology, &knowledge).unwrap();
    let eval = Evaluator::new(&believed, 3, EmpowermentVariant::MarginalBase, None);
    let gi = |n: &str| believed.goal_index(n).unwrap();
    for plan in [
        vec![gi("key"), gi("drink_a")],
        vec![gi("key"), gi("drink_a"), gi("eat_a"), gi("drink_b"), gi("eat_b"), gi("mate")],
        vec![gi("eat_a")],
    ] {
        let with_priors =
            expected_valence_with_priors(&eval, &env2.start, &plan, &knowledge, 0.5).unwrap();
        let plain = valence(&eval, &eval, &env2.start, &plan).unwrap();
        assert!((with_priors - plain).abs() < 1e-12);
    }
}

#[test]
fn remapping_to_the_same_environment_is_idempotent() {
    let s = load_scenario("stoffel_transfer").unwrap();
    let env1 = &s.envs[0];
    let mut knowledge = FeatureSet::default();
    knowledge.features = env1.features.features.clone();
    let gi = env1.ontology.goal_index("drink").unwrap();
    let psi = observe_transformation(&env1.ontology, gi, "lake").unwrap();
    knowledge.bindings.insert("lake".into(), psi);
    knowledge.known.insert("lake".into());
    let a = remap(&env1.ontology, &knowledge).unwrap();
    let b = remap(&env1.ontology, &knowledge).unwrap();
    for mode in 0..a.base.num_modes {
        for goal in 0..a.goals.len() {
            let ca = a.aggregate.cell(mode, goal).unwrap();
            let cb = b.aggregate.cell(mode, goal).unwrap();
            for x in 0..a.base.num_states {
                for t in 0..=a.horizon {
                    assert_eq!(ca.kappa.get(x, t), cb.kappa.get(x, t));
                }
            }
        }
    }
}

#[test]
fn stff_csv_export_round_trips_the_corridor_events() {
    let op = spa_core::model::make_gridworld(5, 1, &[], false).unwrap();
    let f = Availability::always("far_end", 4, None, 1.0);
    let problem = TgMdp::new(op, 0, f, 10);
    let (_, _, stff) = feasibility_iteration(&problem).unwrap();
    let csv = stff.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "goal,x,t,x_f,t_f,p,event");
    assert!(csv.contains("far_end,0,0,4,4,1,success"));
    // Every line has the full column count.
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), 7);
    }
}
