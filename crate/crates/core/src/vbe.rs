//! Finite-horizon Bellman equations whose stage gain is one-step
//! empowerment difference. The solution telescopes: the value at any start
//! equals expected final empowerment minus initial empowerment
//! (path-independence), which the desk-scale solvers here verify against
//! forward plan search.

use std::collections::HashMap;

use crate::empowerment::{
    blahut_arimoto_capacity, build_action_sequence_channel, empowerment_deterministic,
    empowerment_factorized, empowerment_semi_markov_ba, EmpowermentVariant,
};
use crate::error::{Result, SpaError};
use crate::hierarchy::{Ontology, StateVec, SublimationTables};
use crate::model::TransitionOperator;
use crate::planning::Evaluator;

/// Solution of the flat valence Bellman equation on an explicit operator.
pub struct VbeSolution {
    pub horizon: usize,
    pub num_states: usize,
    /// nu*(s, t), indexed s * (horizon + 1) + t.
    pub value: Vec<f64>,
    /// Greedy policy per (s, t).
    pub policy: Vec<usize>,
    /// Per-state n-step empowerment of the operator.
    pub empowerment: Vec<f64>,
}

impl VbeSolution {
    pub fn value_at(&self, s: usize, t: usize) -> f64 {
        self.value[s * (self.horizon + 1) + t]
    }

    pub fn policy_at(&self, s: usize, t: usize) -> usize {
        self.policy[s * (self.horizon + 1) + t]
    }

    /// Distribution over horizon states when following the greedy policy
    /// from (s, t).
    pub fn final_distribution(
        &self,
        op: &TransitionOperator,
        s: usize,
        t: usize,
    ) -> Vec<(usize, f64)> {
        let mut dist: HashMap<usize, f64> = HashMap::from([(s, 1.0)]);
        for tau in t..self.horizon {
            let mut next: HashMap<usize, f64> = HashMap::new();
            for (&x, &p) in &dist {
                let a = self.policy_at(x, tau);
                op.for_row(x, a, tau, 0, |nx, q| {
                    *next.entry(nx).or_insert(0.0) += p * q;
                });
            }
            dist = next;
        }
        let mut v: Vec<(usize, f64)> = dist.into_iter().collect();
        v.sort_unstable_by_key(|&(x, _)| x);
        v
    }
}

/// Backward value iteration with the one-step empowerment difference as the
/// stage gain. Guarded to desk scale (1e5 state-times, 1e4 empowerment
/// channel rows).
pub fn vbe_solve(op: &TransitionOperator, n: usize, horizon: usize) -> Result<VbeSolution> {
    let ns = op.num_states;
    if ns * (horizon + 1) > 100_000 {
        return Err(SpaError::capacity(format!(
            "VBE over {} state-times",
            ns * (horizon + 1)
        )));
    }
    // Stationary per-state empowerment of the operator being measured.
    let mut emp = vec![0.0f64; ns];
    for (s, e) in emp.iter_mut().enumerate() {
        *e = if op.deterministic {
            empowerment_deterministic(op, s, n, 0)?
        } else {
            let channel = build_action_sequence_channel(op, s, n, 0)?;
            blahut_arimoto_capacity(&channel, 1e-9, 10_000)?
        };
    }
    let ti = |s: usize, t: usize| s * (horizon + 1) + t;
    let mut value = vec![0.0f64; ns * (horizon + 1)];
    let mut policy = vec![0usize; ns * (horizon + 1)];
    for t in (0..horizon).rev() {
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..op.num_actions {
                let mut gain = -emp[s];
                let mut cont = 0.0;
                op.for_row(s, a, t, 0, |nx, p| {
                    gain += p * emp[nx];
                    cont += p * value[ti(nx, t + 1)];
                });
                let v = gain + cont;
                if v > best + 1e-12 {
                    best = v;
                    best_a = a;
                }
            }
            value[ti(s, t)] = best;
            policy[ti(s, t)] = best_a;
        }
    }
    Ok(VbeSolution { horizon, num_states: ns, value, policy, empowerment: emp })
}

/// Solution of the hierarchical semi-Markov form over the goal operator:
/// a closed-loop meta-policy over policies with abstract steps k.
pub struct HsmVbeSolution {
    pub abstract_horizon: usize,
    /// Value per (state, k) over the reachable set.
    pub value: HashMap<(StateVec, usize), f64>,
    /// Greedy policy choice per (state, k); None at dead/terminal states.
    pub policy: HashMap<(StateVec, usize), Option<usize>>,
    pub n: usize,
}

impl HsmVbeSolution {
    pub fn value_at(&self, s: &StateVec, k: usize) -> f64 {
        *self.value.get(&(s.clone(), k)).unwrap_or(&0.0)
    }
}

/// Enumerates the reachable (state, k) set from the start under the same
/// expansion gate as tree search, then runs backward induction over k.
///
/// The per-state empowerment term uses the factorized counter when the
/// ontology is deterministic and the policy-sequence channel otherwise.
pub fn hsm_vbe_solve(
    ontology: &Ontology,
    start: &StateVec,
    abstract_horizon: usize,
    n: usize,
    sublimation: Option<&SublimationTables>,
    goal_subset: Option<&[usize]>,
) -> Result<HsmVbeSolution> {
    let goals: Vec<usize> = (0..ontology.goals.len()).collect();
    // Level-by-level reachable sets; transitions cached per (state, goal).
    let mut levels: Vec<Vec<StateVec>> = vec![vec![start.clone()]];
    let mut transitions: HashMap<(StateVec, usize), Vec<(StateVec, f64)>> = HashMap::new();
    let mut actions_of: HashMap<StateVec, Vec<usize>> = HashMap::new();
    let guard = 200_000usize;
    let mut total = 1usize;
    for k in 0..abstract_horizon {
        let mut next: Vec<StateVec> = Vec::new();
        let mut seen: std::collections::HashSet<StateVec> = std::collections::HashSet::new();
        for s in &levels[k] {
            if s.t >= ontology.horizon {
                actions_of.entry(s.clone()).or_default();
                continue;
            }
            let feasible: Vec<usize> = goals
                .iter()
                .copied()
                .filter(|&g| {
                    ontology.policy_feasible(s, g)
                        && sublimation.map_or(true, |tb| tb.check(ontology, g, &s.comps, k))
                })
                .collect();
            actions_of.insert(s.clone(), feasible.clone());
            let expand: Vec<usize> = if feasible.is_empty() {
                // Dead node: a single failure self-step keeps the chain
                // well-defined to the horizon.
                vec![goals[0]]
            } else {
                feasible
            };
            for g in expand {
                let outs = ontology.goal_operator_step(s, g)?;
                let entry: Vec<(StateVec, f64)> =
                    outs.into_iter().map(|o| (o.state, o.p)).collect();
                for (ns, _) in &entry {
                    if seen.insert(ns.clone()) {
                        next.push(ns.clone());
                        total += 1;
                        if total > guard {
                            return Err(SpaError::capacity("hsm-VBE reachable set"));
                        }
                    }
                }
                transitions.insert((s.clone(), g), entry);
            }
        }
        levels.push(next);
    }

    // Empowerment per distinct reachable state.
    let mut emp: HashMap<StateVec, f64> = HashMap::new();
    for level in &levels {
        for s in level {
            if emp.contains_key(s) {
                continue;
            }
            let e = if ontology.is_deterministic() {
                empowerment_factorized(ontology, s, n, goal_subset)?
            } else {
                empowerment_semi_markov_ba(ontology, s, n, goal_subset, 1e-9)?
            };
            emp.insert(s.clone(), e);
        }
    }

    let mut value: HashMap<(StateVec, usize), f64> = HashMap::new();
    let mut policy: HashMap<(StateVec, usize), Option<usize>> = HashMap::new();
    for level in levels.iter() {
        for s in level {
            value.insert((s.clone(), abstract_horizon), 0.0);
        }
    }
    for k in (0..abstract_horizon).rev() {
        for s in &levels[k] {
            let feasible = actions_of.get(s).cloned().unwrap_or_default();
            let candidates: Vec<usize> = if feasible.is_empty() {
                if s.t >= ontology.horizon || transitions.get(&(s.clone(), goals[0])).is_none() {
                    // Terminal: value 0 (no further gain possible).
                    value.insert((s.clone(), k), 0.0);
                    policy.insert((s.clone(), k), None);
                    continue;
                }
                vec![goals[0]]
            } else {
                feasible
            };
            let es = emp[s];
            let mut best = f64::NEG_INFINITY;
            let mut best_g = None;
            for g in candidates {
                let outs = &transitions[&(s.clone(), g)];
                let mut v = -es;
                for (ns, p) in outs {
                    v += p * emp[ns];
                    let cont = value
                        .get(&(ns.clone(), k + 1))
                        .copied()
                        .unwrap_or(0.0);
                    v += p * cont;
                }
                if v > best + 1e-12 {
                    best = v;
                    best_g = Some(g);
                }
            }
            value.insert((s.clone(), k), best);
            policy.insert((s.clone(), k), best_g);
        }
    }
    Ok(HsmVbeSolution { abstract_horizon, value, policy, n })
}

/// Convenience: the best open-loop plan valence from tree search, for
/// comparison against the closed-loop hsm-VBE value.
pub fn best_open_loop_valence(
    ontology: &Ontology,
    start: &StateVec,
    depth: usize,
    n: usize,
    variant: EmpowermentVariant,
    sublimation: Option<&SublimationTables>,
    goal_subset: Option<&[usize]>,
) -> Result<f64> {
    let tree = crate::planning::bfs_plan_search(ontology, start, depth, sublimation)?;
    let eval = Evaluator::new(ontology, n, variant, goal_subset.map(|g| g.to_vec()));
    let report = crate::planning::select_best_plan(&tree, &eval, &eval, false)?;
    report
        .best_plan()
        .map(|p| p.valence)
        .ok_or_else(|| SpaError::domain("empty plan tree"))
}
