//! Idealized life-long learning: the agent starts knowing only null
//! dynamics, plans with valence priors on unknown features, executes policy
//! by policy against the ground-truth world, observes the state
//! transformation a goal induces the first time it fires, and re-plans.
//!
//! Observed transformations are bound to features (not to environments), so
//! a transfer to a new world only recomputes the low-level feasibility
//! tables; high-level knowledge carries over.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::empowerment::EmpowermentVariant;
use crate::error::{Result, SpaError};
use crate::hierarchy::{Ontology, StateVec};
use crate::planning::{bfs_plan_search, Evaluator, PlanTree};

/// A learned rule: the effect one goal variable has on higher-order spaces,
/// expressed against space names so it transfers across environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTransformation {
    pub feature: String,
    /// (space id, action index applied to that space when the goal fires).
    pub effects: Vec<(String, usize)>,
    pub kind: Vec<TransformKind>,
}

/// Shape of one effect, recovered by inspecting the target operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TransformKind {
    /// Sets one bit: pre and post states differ in exactly that bit.
    BitFlip { bit: usize },
    JumpToTop,
    JumpTo { target: usize },
    Identity,
    Table,
}

/// Classifies the action of a deterministic operator into a transformation
/// shape.
pub fn classify_effect(op: &crate::model::TransitionOperator, action: usize) -> TransformKind {
    let n = op.num_states;
    let succ: Vec<usize> = (0..n).map(|s| op.successor(s, action, 0, 0)).collect();
    if succ.iter().enumerate().all(|(s, &ns)| s == ns) {
        return TransformKind::Identity;
    }
    // Bit-flip: every non-identity transition sets exactly one fixed bit.
    let mut bit: Option<usize> = None;
    let mut is_flip = n.is_power_of_two();
    if is_flip {
        for (s, &ns) in succ.iter().enumerate() {
            if s == ns {
                continue;
            }
            let diff = s ^ ns;
            if diff.count_ones() != 1 || ns & diff == 0 {
                is_flip = false;
                break;
            }
            let b = diff.trailing_zeros() as usize;
            match bit {
                None => bit = Some(b),
                Some(prev) if prev == b => {}
                _ => {
                    is_flip = false;
                    break;
                }
            }
        }
    }
    if let (true, Some(b)) = (is_flip, bit) {
        return TransformKind::BitFlip { bit: b };
    }
    if let Some(&target) = succ.first() {
        if succ.iter().all(|&ns| ns == target) {
            return if target == n - 1 {
                TransformKind::JumpToTop
            } else {
                TransformKind::JumpTo { target }
            };
        }
    }
    TransformKind::Table
}

/// Which feature sits behind each goal of an environment, plus the learned
/// (environment-independent) bindings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeatureSet {
    /// goal id -> feature tag; goals without an entry carry the empty
    /// feature, which is never learned.
    pub features: HashMap<String, String>,
    /// Feature tags with a learned transformation.
    pub known: HashSet<String>,
    pub bindings: HashMap<String, StateTransformation>,
}

impl FeatureSet {
    pub fn feature_of(&self, goal_id: &str) -> Option<&str> {
        self.features.get(goal_id).map(|s| s.as_str())
    }

    pub fn is_known(&self, goal_id: &str) -> bool {
        match self.feature_of(goal_id) {
            Some(theta) => self.known.contains(theta),
            None => true, // the empty feature has nothing to learn
        }
    }
}

/// Deterministic observation of the ground-truth transformation behind an
/// activated goal.
pub fn observe_transformation(world: &Ontology, goal: usize, feature: &str) -> Result<StateTransformation> {
    let spec = world
        .goals
        .get(goal)
        .ok_or_else(|| SpaError::domain("unknown goal"))?;
    let mut effects = Vec::new();
    let mut kind = Vec::new();
    for &(j, a) in &spec.effects {
        effects.push((world.spaces[j].id.clone(), a));
        kind.push(classify_effect(&world.spaces[j].op, a));
    }
    Ok(StateTransformation { feature: feature.to_string(), effects, kind })
}

/// The agent's model of a world: the true operators and availability with
/// goal effects stripped down to what has been learned.
pub fn believed_ontology(world: &Ontology, knowledge: &FeatureSet) -> Result<Ontology> {
    let mut believed = world.clone();
    for goal in believed.goals.iter_mut() {
        if !knowledge.is_known(&goal.id) {
            goal.effects.clear();
        } else if let Some(theta) = knowledge.feature_of(&goal.id) {
            if let Some(binding) = knowledge.bindings.get(theta) {
                goal.effects = binding
                    .effects
                    .iter()
                    .map(|(space_id, a)| {
                        world
                            .spaces
                            .iter()
                            .position(|s| &s.id == space_id)
                            .map(|j| (j, *a))
                            .ok_or_else(|| {
                                SpaError::domain(format!("binding references unknown space {space_id}"))
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
        }
    }
    Ok(believed)
}

/// Remaps knowledge onto a new environment: feasibility tables are
/// recomputed against the new base operators, bindings and hitting-time
/// structure carry over untouched.
pub fn remap(world_new: &Ontology, knowledge: &FeatureSet) -> Result<Ontology> {
    believed_ontology(world_new, knowledge)
}

/// Expected valence of a plan under current knowledge plus the prior bonus
/// for unique policies whose terminal feature is unknown, weighted by the
/// arrival probability of the goal actually firing.
pub fn expected_valence_with_priors(
    evaluator: &Evaluator,
    start: &StateVec,
    plan: &[usize],
    knowledge: &FeatureSet,
    prior: f64,
) -> Result<f64> {
    let believed = evaluator.ontology;
    let base = crate::planning::valence(evaluator, evaluator, start, plan)?;
    // Walk the plan, accumulating the probability that each unique unknown
    // policy fires its goal.
    let mut bonus = 0.0;
    let mut counted: HashSet<(usize, usize)> = HashSet::new();
    let mut dist: HashMap<StateVec, f64> = HashMap::from([(start.clone(), 1.0)]);
    for &g in plan {
        let mut fired = 0.0;
        let mut next: HashMap<StateVec, f64> = HashMap::new();
        let mut modes: Vec<usize> = Vec::new();
        for (s, p) in dist {
            if s.t >= believed.horizon {
                *next.entry(s).or_insert(0.0) += p;
                continue;
            }
            let mode = believed.mode_of(&s.comps);
            if !modes.contains(&mode) {
                modes.push(mode);
            }
            for out in believed.goal_operator_step(&s, g)? {
                if out.induced == Some(g) {
                    fired += p * out.p;
                }
                *next.entry(out.state).or_insert(0.0) += p * out.p;
            }
        }
        let goal_id = &believed.goals[g].id;
        if !knowledge.is_known(goal_id) {
            // Unique policies only: one prior credit per (mode, goal).
            let new_mode = modes.iter().any(|&m| counted.insert((m, g)));
            if new_mode {
                bonus += prior * fired;
            }
        }
        dist = next;
    }
    Ok(base + bonus)
}

#[derive(Debug, Clone, Copy)]
pub struct LifelongConfig {
    pub depth: usize,
    pub emp_horizon: usize,
    pub variant: EmpowermentVariant,
    /// Point-mass prior on the valence of an unknown feature, in bits.
    pub prior: f64,
    pub max_steps: usize,
}

/// One record of the life-long event log (JSON-lines serializable).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LifelongEvent {
    PlanChosen { t: usize, plan: Vec<String>, valence_estimate: f64 },
    PolicyExecuted { t: usize, goal: String, fired: bool, x: usize, comps: Vec<usize> },
    Observation { t: usize, feature: String, goal: String },
    Terminal { t: usize, reason: String },
}

pub struct LifelongOutcome {
    pub events: Vec<LifelongEvent>,
    pub knowledge: FeatureSet,
    pub final_state: StateVec,
}

/// Selects the prior-augmented argmax plan over the believed tree (same
/// tie-breaking as plain plan selection).
fn choose_plan(
    evaluator: &Evaluator,
    tree: &PlanTree,
    start: &StateVec,
    knowledge: &FeatureSet,
    prior: f64,
) -> Result<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for leaf in tree.leaves() {
        let plan = tree.plan_of(leaf);
        if plan.is_empty() {
            continue;
        }
        let v = expected_valence_with_priors(evaluator, start, &plan, knowledge, prior)?;
        let better = match &best {
            None => true,
            Some((bp, bv)) => {
                if (v - bv).abs() > 1e-9 {
                    v > *bv
                } else if plan.len() != bp.len() {
                    plan.len() < bp.len()
                } else {
                    plan < *bp
                }
            }
        };
        if better {
            best = Some((plan, v));
        }
    }
    best.ok_or_else(|| SpaError::domain("no executable plan from the current state"))
}

/// Runs the life-long loop on one environment: plan with priors, execute
/// policy by policy on the ground truth, observe new transformations at
/// goal induction, and re-plan after each observation.
///
/// `stop_at_feature` ends the run the moment a policy terminates at a state
/// whose goal carries the named feature (checked before any observation).
pub fn lifelong_loop(
    world: &Ontology,
    knowledge: &mut FeatureSet,
    start: &StateVec,
    config: &LifelongConfig,
    stop_at_feature: Option<&str>,
) -> Result<LifelongOutcome> {
    let mut events = Vec::new();
    let mut state = start.clone();
    'life: while state.t < config.max_steps {
        if state.t >= world.horizon {
            events.push(LifelongEvent::Terminal { t: state.t, reason: "horizon".into() });
            break 'life;
        }
        let believed = believed_ontology(world, knowledge)?;
        let tree = bfs_plan_search(&believed, &state, config.depth, None)?;
        let evaluator = Evaluator::new(&believed, config.emp_horizon, config.variant, None);
        let (plan, estimate) = match choose_plan(&evaluator, &tree, &state, knowledge, config.prior) {
            Ok(p) => p,
            Err(_) => {
                events.push(LifelongEvent::Terminal { t: state.t, reason: "no plan".into() });
                break 'life;
            }
        };
        events.push(LifelongEvent::PlanChosen {
            t: state.t,
            plan: plan.iter().map(|&g| world.goals[g].id.clone()).collect(),
            valence_estimate: estimate,
        });
        for &g in &plan {
            if state.t >= config.max_steps {
                break;
            }
            // Execute against the ground truth; perfect state observation.
            let outs = world.goal_operator_step(&state, g)?;
            if outs.len() != 1 {
                return Err(SpaError::unsupported("life-long execution requires determinism"));
            }
            let out = outs.into_iter().next().unwrap();
            let fired = out.induced == Some(g);
            state = out.state;
            events.push(LifelongEvent::PolicyExecuted {
                t: state.t,
                goal: world.goals[g].id.clone(),
                fired,
                x: state.x,
                comps: state.comps.clone(),
            });
            let goal_id = &world.goals[g].id;
            if fired {
                if let Some(target) = stop_at_feature {
                    if knowledge.feature_of(goal_id) == Some(target) {
                        events.push(LifelongEvent::Terminal {
                            t: state.t,
                            reason: format!("reached feature {target}"),
                        });
                        break 'life;
                    }
                }
                if !knowledge.is_known(goal_id) {
                    let theta = knowledge.feature_of(goal_id).unwrap().to_string();
                    let psi = observe_transformation(world, g, &theta)?;
                    knowledge.bindings.insert(theta.clone(), psi);
                    knowledge.known.insert(theta.clone());
                    events.push(LifelongEvent::Observation {
                        t: state.t,
                        feature: theta,
                        goal: goal_id.clone(),
                    });
                    continue 'life; // re-plan after learning new dynamics
                }
            }
            if out.terminal {
                break;
            }
        }
        // Dead end: defective with nothing feasible ends the run.
        let mode = world.mode_of(&state.comps);
        let any_feasible = (0..world.goals.len()).any(|g| world.aggregate.cell(mode, g)
            .map_or(false, |c| c.kappa.get(state.x, state.t.min(world.horizon)) > 0.0));
        if !any_feasible && world.zeta.defective_mode == Some(mode) {
            events.push(LifelongEvent::Terminal { t: state.t, reason: "death".into() });
            break 'life;
        }
    }
    if state.t >= config.max_steps {
        events.push(LifelongEvent::Terminal { t: state.t, reason: "max steps".into() });
    }
    Ok(LifelongOutcome { events, knowledge: knowledge.clone(), final_state: state })
}

/// Serializes events as JSON-lines.
pub fn events_to_jsonl(events: &[LifelongEvent]) -> Result<String> {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_chain_space, make_chain_space_jump_to, make_static_space};

    #[test]
    fn classify_jump_and_identity() {
        let chain = make_chain_space("y", 5).unwrap();
        assert_eq!(classify_effect(&chain, 0), TransformKind::JumpToTop);
        let partial = make_chain_space_jump_to("y", 6, 3).unwrap();
        assert_eq!(classify_effect(&partial, 0), TransformKind::JumpTo { target: 3 });
        let stat = make_static_space("s", 4, 2);
        assert_eq!(classify_effect(&stat, 0), TransformKind::Identity);
    }

    #[test]
    fn classify_bit_flip() {
        // 2-state one-way flip: 0 -> 1, 1 absorbs.
        let op = crate::model::TransitionOperator::deterministic(
            "phi",
            2,
            2,
            vec![vec![1, 0, 1, 1]],
        );
        assert_eq!(classify_effect(&op, 0), TransformKind::BitFlip { bit: 0 });
    }
}
