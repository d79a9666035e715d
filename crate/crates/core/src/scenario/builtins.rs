//! Built-in worlds with pinned geometry. Every quantity a regression
//! asserts (reachable counts, valences, plan orders, observation counts) is
//! a consequence of the cell positions, chain sizes and windows fixed here;
//! the comments give the arithmetic.

use serde_json::{json, Map, Value};

use super::{
    AgentStartDoc, AvailabilityDoc, EffectDoc, EnvironmentDoc, GoalDoc, HyperDoc, ModeSelectorDoc,
    ScenarioDoc, SpaceDoc, TaskDoc, ZetaDoc,
};

pub const BUILTIN_NAMES: [&str; 6] = [
    "hikers",
    "mountain_key",
    "two_rooms",
    "sublimation_two_tasks",
    "interleave_bog",
    "stoffel_transfer",
];

pub fn builtin(name: &str) -> Option<ScenarioDoc> {
    match name {
        "hikers" => Some(hikers()),
        "mountain_key" => Some(mountain_key()),
        "two_rooms" => Some(two_rooms()),
        "sublimation_two_tasks" => Some(sublimation_two_tasks()),
        "interleave_bog" => Some(interleave_bog()),
        "stoffel_transfer" => Some(stoffel_transfer()),
        _ => None,
    }
}

fn grid_space(id: &str, width: usize, height: usize, mode_walls: Vec<Value>) -> SpaceDoc {
    SpaceDoc {
        id: id.into(),
        kind: "grid".into(),
        params: json!({ "width": width, "height": height, "modes": mode_walls }),
        defective: vec![],
    }
}

fn chain_space(id: &str, size: usize, jumps: &[usize]) -> SpaceDoc {
    SpaceDoc {
        id: id.into(),
        kind: "chain".into(),
        params: json!({ "size": size, "jumps": jumps }),
        defective: vec![0],
    }
}

fn avail(goal: &str, x: usize, a: Option<usize>, t_lo: usize, t_hi: Option<usize>) -> AvailabilityDoc {
    AvailabilityDoc { goal: goal.into(), x, a, t_window: (t_lo, t_hi), p: 1.0 }
}

const STAY: Option<usize> = Some(4);

fn golden(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Two hikers on a snowfield: a 13x13 open grid with a temperature chain.
///
/// Start (6,6) with 2 steps of warmth: the initial reachable disc has the
/// 13 cells within Manhattan radius 2. Plan g1,g2 ends at a lookout with 1
/// step of warmth left (5 cells); plan g3,g4 ends at the cabin with 3 steps
/// (25 cells). Fires g1/g3 burn out after t=1 and the cabin accepts only in
/// t in [6,8]; both windows remove degenerate re-warm plans without
/// touching the two narrated ones.
fn hikers() -> ScenarioDoc {
    let w = 13;
    let idx = |r: usize, c: usize| r * w + c;
    let env = EnvironmentDoc {
        spaces: vec![
            grid_space("x", 13, 13, vec![json!({"walls": []}), json!({"identity": true})]),
            // Temperature: action 0 jumps to 5 (small fire), 1 jumps to 6
            // (larger fire), 2 jumps to 3 (the cabin's stock), 3 is decay.
            chain_space("z", 30, &[5, 6, 3]),
        ],
        modes: vec!["normal".into(), "defective".into()],
        availability: vec![
            avail("g1", idx(6, 7), STAY, 0, Some(1)),
            avail("g2", idx(4, 8), STAY, 0, None),
            avail("g3", idx(6, 5), STAY, 0, Some(1)),
            avail("g4", idx(9, 3), STAY, 6, Some(8)),
        ],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: Some(1),
            default_mode: 0,
            mode_selector: None,
        },
        horizon: 40,
        agent_start: AgentStartDoc { x: idx(6, 6), comps: vec![2], t: 0 },
        goals: vec![
            GoalDoc { id: "g1".into(), effects: vec![EffectDoc { space: "z".into(), action: 0 }] },
            GoalDoc { id: "g2".into(), effects: vec![] },
            GoalDoc { id: "g3".into(), effects: vec![EffectDoc { space: "z".into(), action: 1 }] },
            GoalDoc { id: "g4".into(), effects: vec![EffectDoc { space: "z".into(), action: 2 }] },
        ],
        tasks: vec![],
        features: Default::default(),
        cells: [
            ("start".to_string(), [6, 6]),
            ("fire_a".to_string(), [6, 7]),
            ("lookout".to_string(), [4, 8]),
            ("fire_c".to_string(), [6, 5]),
            ("cabin".to_string(), [9, 3]),
        ]
        .into(),
    };
    ScenarioDoc {
        name: "hikers".into(),
        run: "plan".into(),
        hyper: HyperDoc {
            m: 2,
            n: 3,
            emp: "marginal:x".into(),
            emp_goals: None,
            prior: 0.0,
            max_steps: 0,
            stop_at_feature: None,
        },
        environments: vec![env],
        golden: golden(vec![
            ("initial_count", json!(13)),
            (
                "plans",
                json!([
                    { "policies": ["g1", "g2"], "valence": -1.37, "tol": 0.01, "final_count": 5 },
                    { "policies": ["g3", "g4"], "valence": 0.94, "tol": 0.01, "final_count": 25 },
                ]),
            ),
            ("best_plan", json!(["g3", "g4"])),
        ]),
    }
}

/// A mountain ridge splits the 9x9 world; the door at (4,4) opens only once
/// the key bit is set. The lake is on the west side with the dwarf, the
/// apple tree on the east. Start (4,2): lake 1 step, tree 5 steps through
/// the door, dwarf 3 steps. With hydration 20 and calories 30 the eight
/// 3-policy futures east of the door are pairwise distinct, so task-space
/// empowerment goes from 0 bits (key absent: only drinking is feasible and
/// the single branch collapses) to exactly 3 bits.
fn mountain_key() -> ScenarioDoc {
    let w = 9;
    let idx = |r: usize, c: usize| r * w + c;
    let ridge_closed: Vec<[usize; 2]> = (0..9).map(|r| [r, 4]).collect();
    let ridge_open: Vec<[usize; 2]> = (0..9).filter(|&r| r != 4).map(|r| [r, 4]).collect();
    let env = EnvironmentDoc {
        spaces: vec![
            grid_space(
                "x",
                9,
                9,
                vec![
                    json!({ "walls": ridge_closed }),
                    json!({ "walls": ridge_open }),
                    json!({ "identity": true }),
                ],
            ),
            chain_space("w", 20, &[19]),
            chain_space("y", 30, &[29]),
            SpaceDoc {
                id: "phi".into(),
                kind: "flip".into(),
                params: json!({}),
                defective: vec![],
            },
        ],
        modes: vec!["door_closed".into(), "door_open".into(), "defective".into()],
        availability: vec![
            avail("drink", idx(4, 1), STAY, 0, None),
            avail("eat", idx(4, 7), STAY, 0, None),
            avail("key", idx(7, 2), STAY, 0, None),
        ],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: Some(2),
            default_mode: 0,
            mode_selector: Some(ModeSelectorDoc { space: "phi".into(), table: vec![0, 1] }),
        },
        horizon: 60,
        agent_start: AgentStartDoc { x: idx(4, 2), comps: vec![19, 25, 0], t: 0 },
        goals: vec![
            GoalDoc { id: "drink".into(), effects: vec![EffectDoc { space: "w".into(), action: 0 }] },
            GoalDoc { id: "eat".into(), effects: vec![EffectDoc { space: "y".into(), action: 0 }] },
            GoalDoc { id: "key".into(), effects: vec![EffectDoc { space: "phi".into(), action: 0 }] },
        ],
        tasks: vec![],
        features: Default::default(),
        cells: [
            ("start".to_string(), [4, 2]),
            ("lake".to_string(), [4, 1]),
            ("tree".to_string(), [4, 7]),
            ("dwarf".to_string(), [7, 2]),
            ("door".to_string(), [4, 4]),
        ]
        .into(),
    };
    ScenarioDoc {
        name: "mountain_key".into(),
        run: "plan".into(),
        hyper: HyperDoc {
            m: 2,
            n: 3,
            emp: "task".into(),
            emp_goals: Some(vec!["drink".into(), "eat".into()]),
            prior: 0.0,
            max_steps: 0,
            stop_at_feature: None,
        },
        environments: vec![env],
        golden: golden(vec![
            ("pre_key_bits", json!(0.0)),
            ("post_key_bits", json!(3.0)),
            ("post_key_count", json!(8)),
            ("item_value_bits", json!(3.0)),
            ("item_space", json!("phi")),
            ("eat_afforded_pre", json!(false)),
            ("eat_afforded_post", json!(true)),
        ]),
    }
}

/// Empowerment-map world: an 11x11 grid with a long ridge (door at (5,2))
/// and a walled pocket in the south-east whose opening sits at (8,6). Cell
/// A inside the pocket beats wall-adjacent cell B at horizon 1, and the
/// ordering flips by horizon 5 when B's reach spans both rooms while A is
/// still boxed in.
fn two_rooms() -> ScenarioDoc {
    let mut walls: Vec<[usize; 2]> = (0..11).filter(|&c| c != 2).map(|c| [5, c]).collect();
    for c in 6..11 {
        walls.push([6, c]);
    }
    walls.push([7, 6]);
    walls.push([9, 6]);
    walls.push([10, 6]);
    let env = EnvironmentDoc {
        spaces: vec![grid_space("x", 11, 11, vec![json!({ "walls": walls })])],
        modes: vec!["normal".into()],
        availability: vec![],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: None,
            default_mode: 0,
            mode_selector: None,
        },
        horizon: 20,
        agent_start: AgentStartDoc { x: 9 * 11 + 8, comps: vec![], t: 0 },
        goals: vec![],
        tasks: vec![],
        features: Default::default(),
        cells: [("A".to_string(), [9, 8]), ("B".to_string(), [6, 4])].into(),
    };
    ScenarioDoc {
        name: "two_rooms".into(),
        run: "empmap".into(),
        hyper: HyperDoc {
            m: 1,
            n: 5,
            emp: "full".into(),
            emp_goals: None,
            prior: 0.0,
            max_steps: 0,
            stop_at_feature: None,
        },
        environments: vec![env],
        golden: golden(vec![
            ("cell_high_short", json!("A")),
            ("cell_high_long", json!("B")),
            ("n_short", json!(1)),
            ("n_long", json!(5)),
        ]),
    }
}

/// Two three-bit tasks on a 17x17 grid. Task 1's precedence rules are
/// cyclic, so it is impossible in the bit space alone and its policies are
/// never sampled. Task 2 requires its first bit before the others; flipping
/// E or F first lands in a trap state whose sublimated feasibility is zero,
/// terminating those branches at depth 1. Completing task 2 refills the
/// 30-state hydration chain (start level 8), which is what separates the
/// two completions (D,E,F and D,F,E tie and break lexicographically toward
/// D,E,F) from every wasted-policy plan.
fn sublimation_two_tasks() -> ScenarioDoc {
    let w = 17;
    let idx = |r: usize, c: usize| r * w + c;
    let env = EnvironmentDoc {
        spaces: vec![
            grid_space("x", 17, 17, vec![json!({"walls": []}), json!({"identity": true})]),
            chain_space("w", 30, &[29]),
        ],
        modes: vec!["normal".into(), "defective".into()],
        availability: vec![
            avail("gA", idx(0, 0), STAY, 0, None),
            avail("gB", idx(0, 8), STAY, 0, None),
            avail("gC", idx(0, 16), STAY, 0, None),
            avail("gD", idx(8, 9), STAY, 0, None),
            avail("gE", idx(7, 10), STAY, 0, None),
            avail("gF", idx(9, 10), STAY, 0, None),
        ],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: Some(1),
            default_mode: 0,
            mode_selector: None,
        },
        horizon: 30,
        agent_start: AgentStartDoc { x: idx(8, 8), comps: vec![8, 0, 0], t: 0 },
        goals: vec![
            GoalDoc { id: "gA".into(), effects: vec![] },
            GoalDoc { id: "gB".into(), effects: vec![] },
            GoalDoc { id: "gC".into(), effects: vec![] },
            GoalDoc { id: "gD".into(), effects: vec![] },
            GoalDoc { id: "gE".into(), effects: vec![] },
            GoalDoc { id: "gF".into(), effects: vec![] },
        ],
        tasks: vec![
            TaskDoc {
                id: "task1".into(),
                bits: 3,
                accepting: vec!["111".into()],
                precedence: vec![(0, 1), (1, 2), (2, 0)],
                goal_map: [("0".to_string(), "gA".to_string()), ("1".to_string(), "gB".to_string()), ("2".to_string(), "gC".to_string())].into(),
                resets: vec![],
                deadlines: Default::default(),
                effects: vec![],
                t_window: None,
            },
            TaskDoc {
                id: "task2".into(),
                bits: 3,
                accepting: vec!["111".into()],
                precedence: vec![(0, 1), (0, 2)],
                goal_map: [("0".to_string(), "gD".to_string()), ("1".to_string(), "gE".to_string()), ("2".to_string(), "gF".to_string())].into(),
                resets: vec![],
                deadlines: Default::default(),
                effects: vec![EffectDoc { space: "w".into(), action: 0 }],
                t_window: None,
            },
        ],
        features: Default::default(),
        cells: Default::default(),
    };
    ScenarioDoc {
        name: "sublimation_two_tasks".into(),
        run: "plan".into(),
        hyper: HyperDoc {
            m: 3,
            n: 6,
            emp: "marginal:x".into(),
            emp_goals: None,
            prior: 0.0,
            max_steps: 0,
            stop_at_feature: None,
        },
        environments: vec![env],
        golden: golden(vec![
            ("task1_goals", json!(["gA", "gB", "gC"])),
            ("task1_expansions", json!(0)),
            ("pruned_depth1_goals", json!(["gE", "gF"])),
            ("best_plan", json!(["gD", "gE", "gF"])),
        ]),
    }
}

/// Two consumable tasks interleaved along a 68x7 corridor with 55-state
/// hydration/calorie chains (start levels 42 and 47) and a fire that goes
/// out at t=50. Goals sit 6 apart in the order knife, water, ladder,
/// kettle, coconut (eat), boil (drink); every item expires exactly when
/// the strict interleave would pick it up (t = 6, 13, 20, 27, 34), the
/// fire at t = 50. The interleave completes the meal at t = 35 and the tea
/// at t = 42 with both chains refilled; travel times make every other leaf
/// appear at t >= 28 with at most 14 steps of chain slack, so at horizon
/// 15 the completing plan strictly out-reaches every deviation. Task-sequential orders overshoot a chain or strand the
/// remaining task beyond its windows (the exhaustive check walks them
/// all).
fn interleave_bog() -> ScenarioDoc {
    let w = 68;
    let idx = |r: usize, c: usize| r * w + c;
    let env = EnvironmentDoc {
        spaces: vec![
            grid_space("x", 68, 7, vec![json!({"walls": []}), json!({"identity": true})]),
            chain_space("w", 55, &[54]),
            chain_space("y", 55, &[54]),
        ],
        modes: vec!["normal".into(), "defective".into()],
        availability: vec![
            avail("knife", idx(3, 6), STAY, 0, Some(6)),
            avail("water", idx(3, 12), STAY, 0, Some(13)),
            avail("ladder", idx(3, 18), STAY, 0, Some(20)),
            avail("kettle", idx(3, 24), STAY, 0, Some(27)),
            avail("coconut", idx(3, 30), STAY, 0, Some(34)),
            avail("boil", idx(3, 36), STAY, 0, Some(50)),
        ],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: Some(1),
            default_mode: 0,
            mode_selector: None,
        },
        horizon: 80,
        agent_start: AgentStartDoc { x: idx(3, 0), comps: vec![42, 47, 0, 0], t: 0 },
        goals: vec![
            GoalDoc { id: "knife".into(), effects: vec![] },
            GoalDoc { id: "water".into(), effects: vec![] },
            GoalDoc { id: "ladder".into(), effects: vec![] },
            GoalDoc { id: "kettle".into(), effects: vec![] },
            GoalDoc { id: "coconut".into(), effects: vec![] },
            GoalDoc { id: "boil".into(), effects: vec![] },
        ],
        tasks: vec![
            TaskDoc {
                id: "meal".into(),
                bits: 3,
                accepting: vec!["111".into()],
                precedence: vec![(0, 2), (1, 2)],
                goal_map: [("0".to_string(), "knife".to_string()), ("1".to_string(), "ladder".to_string()), ("2".to_string(), "coconut".to_string())].into(),
                resets: vec![2],
                deadlines: [("2".to_string(), 34)].into(),
                effects: vec![EffectDoc { space: "y".into(), action: 0 }],
                t_window: None,
            },
            TaskDoc {
                id: "tea".into(),
                bits: 3,
                accepting: vec!["111".into()],
                precedence: vec![(0, 2), (1, 2)],
                goal_map: [("0".to_string(), "water".to_string()), ("1".to_string(), "kettle".to_string()), ("2".to_string(), "boil".to_string())].into(),
                resets: vec![0, 2],
                deadlines: [("2".to_string(), 50)].into(),
                effects: vec![EffectDoc { space: "w".into(), action: 0 }],
                t_window: None,
            },
        ],
        features: Default::default(),
        cells: Default::default(),
    };
    ScenarioDoc {
        name: "interleave_bog".into(),
        run: "plan".into(),
        hyper: HyperDoc {
            m: 6,
            n: 15,
            emp: "marginal:x".into(),
            emp_goals: None,
            prior: 0.0,
            max_steps: 0,
            stop_at_feature: None,
        },
        environments: vec![env],
        golden: golden(vec![
            ("task_goals", json!({ "meal": ["knife", "ladder", "coconut"], "tea": ["water", "kettle", "boil"] })),
            ("completes_both", json!(true)),
            ("alive", json!(true)),
            ("interleaves", json!(true)),
            ("sequential_all_die", json!(true)),
        ]),
    }
}

/// Life-long learning and transfer. Environment 1 (11x11, open): the lake
/// one step east, the dwarf right behind it, the apple tree three steps
/// south; 15-state chains give an effective range of 14, so the whole
/// prior-driven sweep (lake, dwarf, tree, 13 steps believed) fits inside
/// the budget the agent believes it has before learning any refills. It
/// learns drinking, then the key, then eating, each followed by a
/// re-plan. Environment 2 (29x5
/// corridor): the door at column 8 hides the first lake, and reaching
/// Hammie at column 25 alive takes exactly the six-policy chain
/// key, drink, eat, drink, eat, mate. Withhold the key knowledge and no
/// six-policy plan survives to Hammie.
fn stoffel_transfer() -> ScenarioDoc {
    let w1 = 11;
    let i1 = |r: usize, c: usize| r * w1 + c;
    let env1 = EnvironmentDoc {
        spaces: vec![
            grid_space("x", 11, 11, vec![json!({"walls": []}), json!({"walls": []}), json!({"identity": true})]),
            chain_space("w", 15, &[14]),
            chain_space("y", 15, &[14]),
            SpaceDoc { id: "phi".into(), kind: "flip".into(), params: json!({}), defective: vec![] },
        ],
        modes: vec!["door_closed".into(), "door_open".into(), "defective".into()],
        availability: vec![
            avail("drink", i1(5, 6), STAY, 0, None),
            avail("key", i1(5, 7), STAY, 0, None),
            avail("eat", i1(8, 5), STAY, 0, None),
        ],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: Some(2),
            default_mode: 0,
            mode_selector: Some(ModeSelectorDoc { space: "phi".into(), table: vec![0, 1] }),
        },
        horizon: 48,
        agent_start: AgentStartDoc { x: i1(5, 5), comps: vec![14, 14, 0], t: 0 },
        goals: vec![
            GoalDoc { id: "drink".into(), effects: vec![EffectDoc { space: "w".into(), action: 0 }] },
            GoalDoc { id: "key".into(), effects: vec![EffectDoc { space: "phi".into(), action: 0 }] },
            GoalDoc { id: "eat".into(), effects: vec![EffectDoc { space: "y".into(), action: 0 }] },
        ],
        tasks: vec![],
        features: [
            ("drink".to_string(), "lake".to_string()),
            ("key".to_string(), "dwarf_key".to_string()),
            ("eat".to_string(), "apple_tree".to_string()),
        ]
        .into(),
        cells: Default::default(),
    };
    let w2 = 29;
    let i2 = |r: usize, c: usize| r * w2 + c;
    let door_closed: Vec<[usize; 2]> = (0..5).map(|r| [r, 8]).collect();
    let door_open: Vec<[usize; 2]> = (0..5).filter(|&r| r != 2).map(|r| [r, 8]).collect();
    let env2 = EnvironmentDoc {
        spaces: vec![
            grid_space(
                "x",
                29,
                5,
                vec![
                    json!({ "walls": door_closed }),
                    json!({ "walls": door_open }),
                    json!({ "identity": true }),
                ],
            ),
            chain_space("w", 15, &[14]),
            chain_space("y", 15, &[14]),
            SpaceDoc { id: "phi".into(), kind: "flip".into(), params: json!({}), defective: vec![] },
        ],
        modes: vec!["door_closed".into(), "door_open".into(), "defective".into()],
        availability: vec![
            avail("key", i2(2, 3), STAY, 0, None),
            avail("drink_a", i2(2, 10), STAY, 0, None),
            avail("eat_a", i2(2, 11), STAY, 0, None),
            avail("drink_b", i2(2, 16), STAY, 0, None),
            avail("eat_b", i2(2, 20), STAY, 0, None),
            avail("mate", i2(2, 25), STAY, 0, None),
        ],
        zeta: ZetaDoc {
            defective: Default::default(),
            defective_mode: Some(2),
            default_mode: 0,
            mode_selector: Some(ModeSelectorDoc { space: "phi".into(), table: vec![0, 1] }),
        },
        horizon: 40,
        agent_start: AgentStartDoc { x: i2(2, 0), comps: vec![14, 14, 0], t: 0 },
        goals: vec![
            GoalDoc { id: "key".into(), effects: vec![EffectDoc { space: "phi".into(), action: 0 }] },
            GoalDoc { id: "drink_a".into(), effects: vec![EffectDoc { space: "w".into(), action: 0 }] },
            GoalDoc { id: "eat_a".into(), effects: vec![EffectDoc { space: "y".into(), action: 0 }] },
            GoalDoc { id: "drink_b".into(), effects: vec![EffectDoc { space: "w".into(), action: 0 }] },
            GoalDoc { id: "eat_b".into(), effects: vec![EffectDoc { space: "y".into(), action: 0 }] },
            GoalDoc { id: "mate".into(), effects: vec![] },
        ],
        tasks: vec![],
        features: [
            ("key".to_string(), "dwarf_key".to_string()),
            ("drink_a".to_string(), "lake".to_string()),
            ("eat_a".to_string(), "apple_tree".to_string()),
            ("drink_b".to_string(), "lake".to_string()),
            ("eat_b".to_string(), "apple_tree".to_string()),
            ("mate".to_string(), "hammie".to_string()),
        ]
        .into(),
        cells: Default::default(),
    };
    ScenarioDoc {
        name: "stoffel_transfer".into(),
        run: "lifelong".into(),
        hyper: HyperDoc {
            m: 6,
            n: 3,
            emp: "marginal:x".into(),
            emp_goals: None,
            prior: 0.5,
            max_steps: 40,
            stop_at_feature: Some("hammie".into()),
        },
        environments: vec![env1, env2],
        golden: golden(vec![
            ("env1_observations", json!(3)),
            ("env1_observation_order", json!(["lake", "dwarf_key", "apple_tree"])),
            ("env2_observations", json!(0)),
            ("env2_plan_len", json!(6)),
            ("env2_reached", json!(true)),
            ("ablation_feature", json!("dwarf_key")),
            ("ablation_no_surviving_plan", json!(true)),
        ]),
    }
}
