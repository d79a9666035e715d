//! Plan search and valence: breadth-first enumeration of policy sequences
//! through the goal operator, the plan operator that marginalizes
//! intermediate state-times, empowerment-gain evaluation of leaves, and
//! plan selection with deterministic tie-breaking.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empowerment::{empowerment, EmpowermentVariant};
use crate::error::{Result, SpaError};
use crate::hierarchy::{Ontology, StateVec, SublimationTables};
use crate::product::ProductParts;

/// A node of the plan tree: the full state vector reached by the policy
/// prefix leading here.
#[derive(Debug, Clone)]
pub struct PlanNode {
    pub state: StateVec,
    pub parent: Option<usize>,
    /// Policy (goal index) applied to reach this node from its parent.
    pub policy: Option<usize>,
    pub depth: usize,
    pub is_leaf: bool,
}

/// Tree of policy sequences produced by breadth-first search. Leaves are
/// nodes at the depth limit plus pruned/terminal nodes.
#[derive(Debug, Clone)]
pub struct PlanTree {
    pub nodes: Vec<PlanNode>,
    pub depth_limit: usize,
}

impl PlanTree {
    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf)
    }

    /// The policy sequence from the root to a node.
    pub fn plan_of(&self, mut node: usize) -> Vec<usize> {
        let mut plan = Vec::new();
        while let Some(parent) = self.nodes[node].parent {
            plan.push(self.nodes[node].policy.expect("non-root nodes carry a policy"));
            node = parent;
        }
        plan.reverse();
        plan
    }
}

/// Breadth-first plan search over the goal operator.
///
/// A policy expands from a node only when its cumulative feasibility under
/// the node's mode is positive and every task space it drives is still
/// abstractly solvable (sublimation gate). Nodes with no expandable policy
/// become leaves; children are pushed in policy-index order.
pub fn bfs_plan_search(
    ontology: &Ontology,
    start: &StateVec,
    depth_limit: usize,
    sublimation: Option<&SublimationTables>,
) -> Result<PlanTree> {
    if depth_limit == 0 {
        return Err(SpaError::domain("plan depth must be >= 1"));
    }
    if start.x >= ontology.base.num_states || start.t > ontology.horizon {
        return Err(SpaError::domain("start outside the ontology domain"));
    }
    if !ontology.is_deterministic() {
        return Err(SpaError::unsupported("tree search requires deterministic dynamics"));
    }
    let mut tree = PlanTree {
        nodes: vec![PlanNode { state: start.clone(), parent: None, policy: None, depth: 0, is_leaf: false }],
        depth_limit,
    };
    let mut queue: std::collections::VecDeque<usize> = std::collections::VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let (state, depth) = (tree.nodes[idx].state.clone(), tree.nodes[idx].depth);
        let mut expanded = false;
        for g in 0..ontology.goals.len() {
            if !ontology.policy_feasible(&state, g) {
                continue;
            }
            if let Some(tables) = sublimation {
                if !tables.check(ontology, g, &state.comps, depth) {
                    continue;
                }
            }
            for out in ontology.goal_operator_step(&state, g)? {
                let child_depth = depth + 1;
                let is_leaf = child_depth >= depth_limit || out.terminal;
                tree.nodes.push(PlanNode {
                    state: out.state,
                    parent: Some(idx),
                    policy: Some(g),
                    depth: child_depth,
                    is_leaf,
                });
                if !is_leaf {
                    queue.push_back(tree.nodes.len() - 1);
                }
            }
            expanded = true;
        }
        if !expanded {
            tree.nodes[idx].is_leaf = true;
        }
    }
    Ok(tree)
}

/// The plan operator: sequential composition of goal-operator steps with
/// intermediate state-times marginalized out. Point mass under determinism.
pub fn plan_operator(
    ontology: &Ontology,
    start: &StateVec,
    plan: &[usize],
) -> Result<Vec<(StateVec, f64)>> {
    let mut dist: HashMap<StateVec, f64> = HashMap::from([(start.clone(), 1.0)]);
    for &g in plan {
        let mut next: HashMap<StateVec, f64> = HashMap::new();
        for (s, p) in dist {
            if s.t >= ontology.horizon {
                *next.entry(s).or_insert(0.0) += p;
                continue;
            }
            for out in ontology.goal_operator_step(&s, g)? {
                *next.entry(out.state).or_insert(0.0) += p * out.p;
            }
        }
        dist = next;
    }
    let mut v: Vec<(StateVec, f64)> = dist.into_iter().collect();
    v.sort_by(|a, b| (a.0.t, a.0.x, &a.0.comps).cmp(&(b.0.t, b.0.x, &b.0.comps)));
    Ok(v)
}

/// Empowerment evaluation context: one ontology, a horizon, a variant and an
/// optional restriction of the policy alphabet the operator is measured on.
pub struct Evaluator<'a> {
    pub ontology: &'a Ontology,
    parts: ProductParts,
    pub n: usize,
    pub variant: EmpowermentVariant,
    pub goal_subset: Option<Vec<usize>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        ontology: &'a Ontology,
        n: usize,
        variant: EmpowermentVariant,
        goal_subset: Option<Vec<usize>>,
    ) -> Self {
        let parts = ProductParts {
            base: ontology.base.clone(),
            spaces: ontology.spaces.clone(),
            zeta: ontology.zeta.clone(),
            f: ontology.f.clone(),
            goals: ontology.goals.clone(),
            second_order: ontology.second_order.clone(),
        };
        Evaluator { ontology, parts, n, variant, goal_subset }
    }

    pub fn eval(&self, state: &StateVec) -> Result<f64> {
        empowerment(
            self.ontology,
            &self.parts,
            state,
            self.n,
            self.variant,
            self.goal_subset.as_deref(),
        )
    }
}

/// Expected empowerment gain of following `plan` from `start`: final
/// empowerment under `after` at the plan-operator distribution, minus the
/// initial empowerment under `before`. Pass the same evaluator twice unless
/// the measured operator changes along the plan.
pub fn valence(
    before: &Evaluator,
    after: &Evaluator,
    start: &StateVec,
    plan: &[usize],
) -> Result<f64> {
    let initial = before.eval(start)?;
    let finals = plan_operator(before.ontology, start, plan)?;
    let mut expected = 0.0;
    for (s, p) in &finals {
        expected += p * after.eval(s)?;
    }
    Ok(expected - initial)
}

/// Final state vector of a plan, as reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalState {
    pub x: usize,
    pub comps: Vec<usize>,
}

/// One evaluated plan in a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEvaluation {
    pub policies: Vec<String>,
    pub final_state: FinalState,
    pub final_time: usize,
    pub final_empowerment: f64,
    pub valence: f64,
}

/// The outcome of evaluating every leaf of a plan tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValenceReport {
    pub initial_empowerment: f64,
    pub plans: Vec<PlanEvaluation>,
    /// Index into `plans` of the selected plan.
    pub best: Option<usize>,
    /// Set when even the best plan does not improve on the initial state.
    pub no_improving_plan: bool,
}

impl ValenceReport {
    pub fn best_plan(&self) -> Option<&PlanEvaluation> {
        self.best.map(|i| &self.plans[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("plan,final_x,final_time,final_empowerment,valence,best\n");
        for (i, p) in self.plans.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.policies.join("|"),
                p.final_state.x,
                p.final_time,
                p.final_empowerment,
                p.valence,
                if Some(i) == self.best { 1 } else { 0 },
            ));
        }
        out
    }
}

/// True when plan `a` is preferred over `b`: higher valence, then shorter,
/// then lexicographically smaller policy sequence.
fn plan_better(a: (&[usize], f64), b: (&[usize], f64)) -> bool {
    if (a.1 - b.1).abs() > 1e-9 {
        return a.1 > b.1;
    }
    if a.0.len() != b.0.len() {
        return a.0.len() < b.0.len();
    }
    a.0 < b.0
}

/// Evaluates final empowerment and valence for every leaf and returns the
/// argmax plan. Distinct leaf states are evaluated once; with `parallel`
/// they are evaluated across threads (the reduction stays deterministic).
pub fn select_best_plan(
    tree: &PlanTree,
    before: &Evaluator,
    after: &Evaluator,
    parallel: bool,
) -> Result<ValenceReport> {
    let initial = before.eval(&tree.nodes[0].state)?;
    let leaf_ids: Vec<usize> = tree.leaves().collect();
    if leaf_ids.is_empty() {
        return Ok(ValenceReport {
            initial_empowerment: initial,
            plans: Vec::new(),
            best: None,
            no_improving_plan: true,
        });
    }
    let mut distinct: Vec<StateVec> = leaf_ids.iter().map(|&i| tree.nodes[i].state.clone()).collect();
    distinct.sort_by(|a, b| (a.t, a.x, &a.comps).cmp(&(b.t, b.x, &b.comps)));
    distinct.dedup();
    let values: Vec<f64> = if parallel {
        distinct
            .par_iter()
            .map(|s| after.eval(s))
            .collect::<Result<Vec<_>>>()?
    } else {
        distinct.iter().map(|s| after.eval(s)).collect::<Result<Vec<_>>>()?
    };
    let cache: HashMap<&StateVec, f64> = distinct.iter().zip(values.iter().copied()).collect();

    let mut plans = Vec::with_capacity(leaf_ids.len());
    let mut best: Option<(usize, Vec<usize>, f64)> = None;
    for &leaf in &leaf_ids {
        let node = &tree.nodes[leaf];
        let plan = tree.plan_of(leaf);
        let final_emp = cache[&node.state];
        let v = final_emp - initial;
        let idx = plans.len();
        plans.push(PlanEvaluation {
            policies: plan.iter().map(|&g| before.ontology.goals[g].id.clone()).collect(),
            final_state: FinalState { x: node.state.x, comps: node.state.comps.clone() },
            final_time: node.state.t,
            final_empowerment: final_emp,
            valence: v,
        });
        let better = match &best {
            None => true,
            Some((_, bp, bv)) => plan_better((&plan, v), (bp, *bv)),
        };
        if better {
            best = Some((idx, plan, v));
        }
    }
    let (best_idx, _, best_val) = best.expect("at least one leaf");
    Ok(ValenceReport {
        initial_empowerment: initial,
        plans,
        best: Some(best_idx),
        no_improving_plan: best_val <= 0.0,
    })
}

/// Empowerment difference between two state vectors that differ in exactly
/// one component: the value of the item/bit that separates them. The
/// measured operator must not include the item-acquisition task itself
/// (restrict via the evaluator's goal subset).
pub fn item_value(
    evaluator: &Evaluator,
    state_with: &StateVec,
    state_without: &StateVec,
) -> Result<f64> {
    if state_with.x != state_without.x
        || state_with.t != state_without.t
        || state_with.comps.len() != state_without.comps.len()
    {
        return Err(SpaError::domain("item value: states must share base state and time"));
    }
    let differing = state_with
        .comps
        .iter()
        .zip(&state_without.comps)
        .filter(|(a, b)| a != b)
        .count();
    if differing != 1 {
        return Err(SpaError::domain(format!(
            "item value: states differ in {differing} components, expected exactly 1"
        )));
    }
    Ok(evaluator.eval(state_with)? - evaluator.eval(state_without)?)
}

/// The affordance set of a goal at time `t`: which (mode, base state) pairs
/// give its policy positive success mass.
#[derive(Debug, Clone)]
pub struct AffordanceSet {
    pub goal: usize,
    pub t: usize,
    /// Per mode, the sorted base states from which the goal is afforded.
    pub per_mode: Vec<Vec<usize>>,
}

impl AffordanceSet {
    pub fn contains(&self, ontology: &Ontology, state: &StateVec) -> bool {
        let mode = ontology.mode_of(&state.comps);
        self.per_mode[mode].binary_search(&state.x).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.per_mode.iter().all(|v| v.is_empty())
    }
}

/// Membership by the positive-success-mass criterion on the aggregate
/// feasibility operator.
pub fn affordance_set(ontology: &Ontology, goal: usize, t: usize) -> Result<AffordanceSet> {
    if goal >= ontology.goals.len() {
        return Err(SpaError::domain("unknown goal"));
    }
    let mut per_mode = Vec::with_capacity(ontology.base.num_modes);
    for mode in 0..ontology.base.num_modes {
        let mut xs = Vec::new();
        if let Some(cell) = ontology.aggregate.cell(mode, goal) {
            for x in 0..ontology.base.num_states {
                if cell.stff.success_mass(x, t) > 0.0 {
                    xs.push(x);
                }
            }
        }
        per_mode.push(xs);
    }
    Ok(AffordanceSet { goal, t, per_mode })
}
