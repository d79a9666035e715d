//! Factorized hierarchical planning: prediction operators for secondary
//! spaces, defective-state hitting times, mode functions, the constrained
//! aggregate feasibility operator and the one-step goal operator that
//! advances full state vectors without materializing the product space.

use std::collections::HashMap;

use crate::error::{Result, SpaError};
use crate::feasibility::{feasibility_iteration, CumulativeFeasibility, Policy, Stff};
use crate::model::{
    ActionAvailability, Availability, TgMdp, TransitionOperator,
};

/// Null-dynamics forecast of a secondary space: where the space's state will
/// be after an elapsed duration with no induced goal.
#[derive(Debug, Clone)]
pub enum PredictionOperator {
    /// Identity for every duration (static spaces).
    Static,
    /// Deterministic null chain; `maps[t_d][y]` is the state after `t_d`
    /// steps, with the one-step chain kept for durations past the cache.
    Deterministic { maps: Vec<Vec<usize>>, chain: Vec<usize> },
    /// Dense row-major powers of the null Markov matrix.
    Stochastic { n: usize, powers: Vec<Vec<f64>> },
}

impl PredictionOperator {
    pub fn max_duration(&self) -> usize {
        match self {
            PredictionOperator::Static => usize::MAX,
            PredictionOperator::Deterministic { .. } => usize::MAX,
            PredictionOperator::Stochastic { powers, .. } => powers.len() - 1,
        }
    }

    /// Deterministic advance; errors on stochastic chains.
    pub fn advance(&self, y: usize, t_d: usize) -> Result<usize> {
        match self {
            PredictionOperator::Static => Ok(y),
            PredictionOperator::Deterministic { maps, chain } => {
                if t_d < maps.len() {
                    return Ok(maps[t_d][y]);
                }
                let mut s = maps[maps.len() - 1][y];
                for _ in 0..(t_d - (maps.len() - 1)) {
                    let next = chain[s];
                    if next == s {
                        break;
                    }
                    s = next;
                }
                Ok(s)
            }
            PredictionOperator::Stochastic { .. } => Err(SpaError::unsupported(
                "stochastic secondary dynamics in the factorized step",
            )),
        }
    }

    /// Distribution row of the advance (works for all variants).
    pub fn advance_dist(&self, y: usize, t_d: usize) -> Vec<(usize, f64)> {
        match self {
            PredictionOperator::Static => vec![(y, 1.0)],
            PredictionOperator::Deterministic { .. } => {
                vec![(self.advance(y, t_d).expect("deterministic advance"), 1.0)]
            }
            PredictionOperator::Stochastic { n, powers } => {
                let t = t_d.min(powers.len() - 1);
                (0..*n).filter_map(|yf| {
                    let p = powers[t][y * n + yf];
                    (p > 0.0).then_some((yf, p))
                }).collect()
            }
        }
    }
}

/// Builds the prediction operator by iterated application of the null
/// chain, caching every duration up to `max_t_d`.
pub fn build_prediction_operator(op: &TransitionOperator, max_t_d: usize) -> Result<PredictionOperator> {
    op.null_action
        .ok_or_else(|| SpaError::domain(format!("operator {}: no null action", op.id)))?;
    if op.deterministic {
        let chain = op.null_chain_deterministic(0)?;
        // Static spaces need no cache at all.
        if chain.iter().enumerate().all(|(y, &ny)| y == ny) {
            return Ok(PredictionOperator::Static);
        }
        let n = op.num_states;
        let mut maps = Vec::with_capacity(max_t_d + 1);
        maps.push((0..n).collect::<Vec<_>>());
        for t in 1..=max_t_d {
            let prev = &maps[t - 1];
            maps.push((0..n).map(|y| chain[prev[y]]).collect());
        }
        Ok(PredictionOperator::Deterministic { maps, chain })
    } else {
        let n = op.num_states;
        let chain = op.null_chain_matrix(0)?;
        let mut powers = Vec::with_capacity(max_t_d + 1);
        let mut ident = vec![0.0; n * n];
        for i in 0..n {
            ident[i * n + i] = 1.0;
        }
        powers.push(ident);
        for t in 1..=max_t_d {
            let prev = &powers[t - 1];
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for k in 0..n {
                    let pik = prev[i * n + k];
                    if pik == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        next[i * n + j] += pik * chain[k * n + j];
                    }
                }
            }
            powers.push(next);
        }
        Ok(PredictionOperator::Stochastic { n, powers })
    }
}

/// Expected first-hit time to the defective set under null dynamics, per
/// state; infinity marks unreachable, zero marks defective states.
pub type HittingTimes = Vec<f64>;

/// Solves the first-hit linear system `(I - P_eps_bar) t = 1` with
/// defective rows/columns removed. Deterministic chains short-circuit to
/// successor iteration, which is the exact first-hit count.
pub fn hitting_times(op: &TransitionOperator, defective: &[usize]) -> Result<HittingTimes> {
    let n = op.num_states;
    let is_def = |y: usize| defective.contains(&y);
    if defective.is_empty() {
        return Ok(vec![f64::INFINITY; n]);
    }
    if op.deterministic {
        // Exact first-hit by reverse BFS over the single-successor chain.
        let chain = op.null_chain_deterministic(0)?;
        let mut t = vec![f64::INFINITY; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for y in 0..n {
            if !is_def(y) {
                preds[chain[y]].push(y);
            }
        }
        let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&y| is_def(y)).collect();
        for y in 0..n {
            if is_def(y) {
                t[y] = 0.0;
            }
        }
        while let Some(v) = queue.pop_front() {
            for &p in &preds[v] {
                if t[p].is_infinite() {
                    t[p] = t[v] + 1.0;
                    queue.push_back(p);
                }
            }
        }
        return Ok(t);
    }

    // General case: restrict to transient states that can reach the set.
    let chain = op.null_chain_matrix(0)?;
    let mut reach = vec![false; n];
    for y in 0..n {
        reach[y] = is_def(y);
    }
    loop {
        let mut changed = false;
        for y in 0..n {
            if reach[y] || is_def(y) {
                continue;
            }
            let can = (0..n).any(|j| chain[y * n + j] > 0.0 && reach[j]);
            if can {
                reach[y] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&y| !is_def(y) && reach[y]).collect();
    let m = transient.len();
    let pos: HashMap<usize, usize> = transient.iter().enumerate().map(|(i, &y)| (y, i)).collect();
    // Build (I - P_bar) and solve against the ones vector.
    let mut a = vec![0.0f64; m * m];
    let mut b = vec![1.0f64; m];
    for (i, &y) in transient.iter().enumerate() {
        for (j, &z) in transient.iter().enumerate() {
            let p = chain[y * n + z];
            a[i * m + j] = if i == j { 1.0 - p } else { -p };
        }
    }
    gaussian_solve(&mut a, &mut b, m).map_err(|_| {
        SpaError::Numerical("singular first-hit system with reachable defective states".into())
    })?;
    let mut t = vec![f64::INFINITY; n];
    for y in 0..n {
        if is_def(y) {
            t[y] = 0.0;
        } else if let Some(&i) = pos.get(&y) {
            t[y] = b[i];
        }
    }
    Ok(t)
}

/// In-place Gaussian elimination with partial pivoting; `b` becomes the
/// solution.
fn gaussian_solve(a: &mut [f64], b: &mut [f64], n: usize) -> std::result::Result<(), ()> {
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-12 {
            return Err(());
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = b[col];
        for c in col + 1..n {
            v -= a[col * n + c] * b[c];
        }
        b[col] = v / a[col * n + col];
    }
    Ok(())
}

/// One secondary space of the factorization bundle: its operator, defective
/// set, null-dynamics forecast and first-hit times.
#[derive(Debug, Clone)]
pub struct SecondarySpace {
    pub id: String,
    pub op: TransitionOperator,
    pub defective: Vec<usize>,
    pub omega: PredictionOperator,
    pub hitting: HittingTimes,
}

impl SecondarySpace {
    pub fn build(id: impl Into<String>, op: TransitionOperator, defective: Vec<usize>, max_t_d: usize) -> Result<Self> {
        let omega = build_prediction_operator(&op, max_t_d)?;
        let hitting = hitting_times(&op, &defective)?;
        Ok(SecondarySpace { id: id.into(), op, defective, omega, hitting })
    }

    pub fn is_defective(&self, state: usize) -> bool {
        self.defective.contains(&state)
    }
}

/// Rule mapping full internal vectors to dynamics modes. The defective rule
/// is element-invariant (any defective component forces the defective mode);
/// an optional selector lets one static component pick among normal modes.
#[derive(Debug, Clone)]
pub struct ModeFunction {
    pub default_mode: usize,
    /// (space index, per-state mode table) for environment-style modes.
    pub selector: Option<(usize, Vec<usize>)>,
    pub defective_mode: Option<usize>,
}

impl ModeFunction {
    pub fn defective_only(defective_mode: usize) -> Self {
        ModeFunction { default_mode: 0, selector: None, defective_mode: Some(defective_mode) }
    }

    pub fn mode(&self, spaces: &[SecondarySpace], comps: &[usize]) -> usize {
        if let Some(dm) = self.defective_mode {
            for (j, space) in spaces.iter().enumerate() {
                if space.is_defective(comps[j]) {
                    return dm;
                }
            }
        }
        if let Some((j, table)) = &self.selector {
            table[comps[*j]]
        } else {
            self.default_mode
        }
    }
}

/// A named higher-order goal: inducing it applies `effects` (one action per
/// listed secondary space); all other spaces take their null step.
#[derive(Debug, Clone)]
pub struct GoalSpec {
    pub id: String,
    pub effects: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct StffCell {
    pub kappa: CumulativeFeasibility,
    pub policy: Policy,
    pub stff: Stff,
}

/// Table of (mode, goal) -> solved feasibility cells, with the hitting-time
/// constraint applied at query time.
#[derive(Debug, Clone)]
pub struct AggregateStff {
    pub horizon: usize,
    cells: HashMap<(usize, usize), StffCell>,
}

impl AggregateStff {
    pub fn cell(&self, mode: usize, goal: usize) -> Option<&StffCell> {
        self.cells.get(&(mode, goal))
    }
}

/// Solves one TG-MDP per (mode, goal) from the goal-restricted availability
/// functions. The restriction of a multi-goal availability to one goal must
/// be homogeneous (one non-null goal), which restriction guarantees here by
/// construction.
pub fn build_aggregate_stff(
    base: &TransitionOperator,
    f: &ActionAvailability,
    goals: &[GoalSpec],
    horizon: usize,
) -> Result<AggregateStff> {
    let mut cells = HashMap::new();
    for mode in 0..base.num_modes {
        for (gi, goal) in goals.iter().enumerate() {
            let avail = f
                .restrict(&goal.id)
                .ok_or_else(|| SpaError::domain(format!("goal {} has no availability", goal.id)))?
                .clone();
            let problem = TgMdp::new(base.clone(), mode, avail, horizon);
            let (kappa, policy, stff) = feasibility_iteration(&problem)?;
            cells.insert((mode, gi), StffCell { kappa, policy, stff });
        }
    }
    Ok(AggregateStff { horizon, cells })
}

/// A second-order task: an accepting set on one secondary (task vector)
/// space which, when entered, induces actions on other spaces and resets
/// consumable bits.
#[derive(Debug, Clone)]
pub struct SecondOrderTask {
    pub sigma_space: usize,
    pub accepting: Vec<usize>,
    pub t_lo: usize,
    pub t_hi: usize,
    /// Induced second-order actions: (space index, action index).
    pub effects: Vec<(usize, usize)>,
    /// Bit positions cleared in the task space when the task fires.
    pub reset_bits: Vec<usize>,
}

impl SecondOrderTask {
    fn fires(&self, sigma_state: usize, t: usize) -> bool {
        self.accepting.contains(&sigma_state) && self.t_lo <= t && t <= self.t_hi
    }

    fn apply_resets(&self, sigma_state: usize) -> usize {
        let mut s = sigma_state;
        for &bit in &self.reset_bits {
            s &= !(1usize << bit);
        }
        s
    }
}

/// The factorization bundle: everything needed to advance full state
/// vectors policy by policy without the product space.
#[derive(Debug, Clone)]
pub struct Ontology {
    pub base: TransitionOperator,
    pub spaces: Vec<SecondarySpace>,
    pub zeta: ModeFunction,
    pub f: ActionAvailability,
    pub goals: Vec<GoalSpec>,
    pub aggregate: AggregateStff,
    pub second_order: Vec<SecondOrderTask>,
    pub horizon: usize,
}

/// Full state vector: base state, one component per secondary space, time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateVec {
    pub x: usize,
    pub comps: Vec<usize>,
    pub t: usize,
}

impl StateVec {
    pub fn new(x: usize, comps: Vec<usize>, t: usize) -> Self {
        StateVec { x, comps, t }
    }
}

/// One outcome of applying a policy through the goal operator.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: StateVec,
    pub p: f64,
    /// Goal index induced at termination; None is the null goal (failure).
    pub induced: Option<usize>,
    /// Set when the branch hit the horizon and could not take its one-step
    /// update; such branches do not expand further.
    pub terminal: bool,
}

impl Ontology {
    pub fn build(
        base: TransitionOperator,
        spaces: Vec<SecondarySpace>,
        zeta: ModeFunction,
        f: ActionAvailability,
        goals: Vec<GoalSpec>,
        second_order: Vec<SecondOrderTask>,
        horizon: usize,
    ) -> Result<Self> {
        f.validate()?;
        for goal in &goals {
            for &(j, a) in &goal.effects {
                if j >= spaces.len() || a >= spaces[j].op.num_actions {
                    return Err(SpaError::domain(format!("goal {}: effect out of range", goal.id)));
                }
            }
        }
        let aggregate = build_aggregate_stff(&base, &f, &goals, horizon)?;
        Ok(Ontology { base, spaces, zeta, f, goals, aggregate, second_order, horizon })
    }

    /// Rebuilds only the feasibility cells (used when the base operator or
    /// availability changed but the higher-order structure carries over).
    pub fn rebuild_aggregate(&mut self) -> Result<()> {
        self.aggregate = build_aggregate_stff(&self.base, &self.f, &self.goals, self.horizon)?;
        Ok(())
    }

    pub fn goal_index(&self, id: &str) -> Option<usize> {
        self.goals.iter().position(|g| g.id == id)
    }

    pub fn mode_of(&self, comps: &[usize]) -> usize {
        self.zeta.mode(&self.spaces, comps)
    }

    /// Minimal time before any component's null decay forces a mode switch.
    pub fn min_hitting(&self, comps: &[usize]) -> f64 {
        let mut m = f64::INFINITY;
        for (j, space) in self.spaces.iter().enumerate() {
            m = m.min(space.hitting[comps[j]]);
        }
        m
    }

    /// True when every piece of the bundle is deterministic.
    pub fn is_deterministic(&self) -> bool {
        self.base.deterministic
            && self.spaces.iter().all(|s| s.op.deterministic)
            && self.goals.iter().all(|g| {
                self.f.restrict(&g.id).map_or(true, |a| a.is_deterministic())
            })
    }

    /// Whether the policy for `goal` can be expanded at all from (x, t)
    /// under the current mode (the tree-search gate).
    pub fn policy_feasible(&self, state: &StateVec, goal: usize) -> bool {
        let mode = self.mode_of(&state.comps);
        match self.aggregate.cell(mode, goal) {
            Some(cell) => cell.kappa.get(state.x, state.t) > 0.0,
            None => false,
        }
    }

    /// Applies one policy through the constrained aggregate feasibility
    /// operator and evolves every space one extra step past termination.
    ///
    /// Success events later than the minimal hitting time are reclassified
    /// as failures at the start (the query is infeasible under the current
    /// internal vector). Failures self-map and then take the same one-step
    /// update with the null goal.
    pub fn goal_operator_step(&self, state: &StateVec, goal: usize) -> Result<Vec<StepOutcome>> {
        let mode = self.mode_of(&state.comps);
        let cell = self
            .aggregate
            .cell(mode, goal)
            .ok_or_else(|| SpaError::domain(format!("no policy for goal {goal} under mode {mode}")))?;
        let (x, t) = (state.x, state.t);
        if t > self.horizon {
            return Err(SpaError::domain("state time beyond horizon"));
        }
        let min_hit = self.min_hitting(&state.comps);

        // Partition termination events under the hitting-time constraint.
        let mut terminations: Vec<(Option<usize>, usize, usize, f64)> = Vec::new();
        let kappa = cell.kappa.get(x, t);
        if kappa <= 0.0 {
            terminations.push((None, x, t, 1.0));
        } else {
            let mut reassigned = 0.0;
            for &(xf, tfin, p) in cell.stff.success_events(x, t) {
                if (tfin - t) as f64 <= min_hit + 1e-9 {
                    terminations.push((Some(goal), xf, tfin, p));
                } else {
                    reassigned += p;
                }
            }
            for &(xf, tfin, p) in cell.stff.failure_events(x, t) {
                if (tfin - t) as f64 <= min_hit + 1e-9 {
                    terminations.push((None, xf, tfin, p));
                } else {
                    reassigned += p;
                }
            }
            if reassigned > 0.0 {
                terminations.push((None, x, t, reassigned));
            }
        }

        let mut outcomes = Vec::new();
        for (induced, xf, tfin, p) in terminations {
            if p <= 0.0 {
                continue;
            }
            let t_d = tfin - t;
            // Forecast every secondary component over the elapsed duration.
            let mut comps_f = Vec::with_capacity(self.spaces.len());
            for (j, space) in self.spaces.iter().enumerate() {
                comps_f.push(space.omega.advance(state.comps[j], t_d)?);
            }
            if tfin >= self.horizon {
                outcomes.push(StepOutcome {
                    state: StateVec::new(xf, comps_f, tfin),
                    p,
                    induced,
                    terminal: true,
                });
                continue;
            }
            // One extra step: the policy's action at the termination state
            // under the post-forecast mode, goal effects on their targets,
            // null steps elsewhere, then second-order tasks on the result.
            let mode_f = self.mode_of(&comps_f);
            let a_pi = cell.policy.action(xf, tfin);
            let mut actions: Vec<usize> = self
                .spaces
                .iter()
                .map(|s| s.op.null_action.expect("secondary spaces carry a null action"))
                .collect();
            if let Some(g) = induced {
                for &(j, a) in &self.goals[g].effects {
                    actions[j] = a;
                }
            }
            let mut comps_next = Vec::with_capacity(self.spaces.len());
            for (j, space) in self.spaces.iter().enumerate() {
                comps_next.push(space.op.successor(comps_f[j], actions[j], tfin, 0));
            }
            // Second-order tasks fire on the post-step task vector.
            let t_next = tfin + 1;
            for task in &self.second_order {
                if task.fires(comps_next[task.sigma_space], t_next) {
                    for &(j, a) in &task.effects {
                        comps_next[j] = self.spaces[j].op.successor(comps_f[j], a, tfin, 0);
                    }
                    comps_next[task.sigma_space] = task.apply_resets(comps_next[task.sigma_space]);
                }
            }
            // Base step may be stochastic; fan out.
            let mut base_row = Vec::new();
            self.base.for_row(xf, a_pi, tfin, mode_f, |nx, bp| base_row.push((nx, bp)));
            for (nx, bp) in base_row {
                outcomes.push(StepOutcome {
                    state: StateVec::new(nx, comps_next.clone(), t_next),
                    p: p * bp,
                    induced,
                    terminal: false,
                });
            }
        }
        Ok(outcomes)
    }
}

/// A Boolean Ordered Goal task: accepting bit vectors plus precedence rules
/// `(i, j)` meaning bit i cannot flip to 1 while bit j is already 1.
#[derive(Debug, Clone)]
pub struct BogTask {
    pub bits: usize,
    pub accepting: Vec<usize>,
    pub precedence: Vec<(usize, usize)>,
    /// Bit index -> goal id that flips it.
    pub goal_map: HashMap<usize, String>,
    pub resets: Vec<usize>,
    /// Bit index -> last time the flip is available (encoded in F).
    pub deadlines: HashMap<usize, usize>,
}

/// Deterministic bit-flip operator over 2^bits states honoring precedence;
/// action k flips bit k, the last action is the null identity. Reverse
/// transitions (1 -> 0) are never actions; consumable resets are applied by
/// second-order tasks instead.
pub fn build_bog_operator(task: &BogTask) -> Result<TransitionOperator> {
    if task.bits > 20 {
        return Err(SpaError::capacity(format!("BOG task with {} bits", task.bits)));
    }
    for &(i, j) in &task.precedence {
        if i >= task.bits || j >= task.bits {
            return Err(SpaError::domain("precedence rule references unknown bit"));
        }
    }
    let n = 1usize << task.bits;
    let na = task.bits + 1;
    let mut map = vec![0usize; n * na];
    for s in 0..n {
        for bit in 0..task.bits {
            let already = s & (1 << bit) != 0;
            let blocked = task
                .precedence
                .iter()
                .any(|&(i, j)| i == bit && s & (1 << j) != 0);
            map[s * na + bit] = if already || blocked { s } else { s | (1 << bit) };
        }
        map[s * na + task.bits] = s; // null
    }
    Ok(TransitionOperator::deterministic(format!("bog{}", task.bits), n, na, vec![map])
        .with_null_action(task.bits))
}

/// Restricts a hierarchical problem to one task-vector space: the sublimated
/// availability keeps, per (sigma, t), the maximum availability over all
/// discarded variables. Solving the returned problem bounds the full
/// hierarchical feasibility from above.
pub fn sublimate(
    sigma_op: &TransitionOperator,
    accepting: &[usize],
    t_lo: usize,
    t_hi: usize,
    horizon: usize,
) -> TgMdp {
    let mut f = Availability::new("sublimated");
    for &s in accepting {
        f.push(s, None, t_lo, t_hi, 1.0);
    }
    TgMdp::new(sigma_op.clone(), 0, f, horizon)
}

/// Sublimated feasibility tables per task space, used to prune tree search.
#[derive(Debug, Clone)]
pub struct SublimationTables {
    /// space index -> kappa over (sigma, plan depth).
    pub per_space: HashMap<usize, CumulativeFeasibility>,
}

impl SublimationTables {
    /// Solves one abstract problem per second-order task with plan depth as
    /// the time axis (each goal advances the task space one abstract step).
    pub fn build(ontology: &Ontology, plan_depth: usize) -> Result<Self> {
        let mut per_space = HashMap::new();
        for task in &ontology.second_order {
            let space = &ontology.spaces[task.sigma_space];
            let problem = sublimate(&space.op, &task.accepting, 0, usize::MAX, plan_depth);
            let (kappa, _, _) = feasibility_iteration(&problem)?;
            per_space.insert(task.sigma_space, kappa);
        }
        Ok(SublimationTables { per_space })
    }

    /// Gate for expanding `goal` at tree depth `depth`: every task space the
    /// goal drives must still be abstractly solvable from its current state.
    pub fn check(&self, ontology: &Ontology, goal: usize, comps: &[usize], depth: usize) -> bool {
        for &(j, _) in &ontology.goals[goal].effects {
            if let Some(kappa) = self.per_space.get(&j) {
                if kappa.get(comps[j], depth.min(kappa.horizon)) <= 0.0 {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_chain_space, make_static_space};

    #[test]
    fn omega_identity_at_zero_and_chain_descent() {
        let op = make_chain_space("y", 5).unwrap();
        let omega = build_prediction_operator(&op, 10).unwrap();
        assert_eq!(omega.advance(3, 0).unwrap(), 3);
        assert_eq!(omega.advance(4, 3).unwrap(), 1);
        assert_eq!(omega.advance(4, 9).unwrap(), 0);
    }

    #[test]
    fn omega_static_space_is_identity_for_all_durations() {
        let op = make_static_space("sigma", 8, 4);
        let omega = build_prediction_operator(&op, 50).unwrap();
        for t_d in [0usize, 1, 17, 50] {
            assert_eq!(omega.advance(5, t_d).unwrap(), 5);
        }
    }

    #[test]
    fn hitting_times_chain_index_law() {
        let op = make_chain_space("y", 5).unwrap();
        let t = hitting_times(&op, &[0]).unwrap();
        assert_eq!(t, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn hitting_times_blocked_chain_is_infinite() {
        // Null dynamics with a self-loop above the floor.
        let mut map = vec![0usize; 4 * 2];
        for y in 0..4 {
            map[y * 2] = 3;
            map[y * 2 + 1] = if y == 2 { 2 } else { y.saturating_sub(1) };
        }
        let op = TransitionOperator::deterministic("b", 4, 2, vec![map]).with_null_action(1);
        let t = hitting_times(&op, &[0]).unwrap();
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 1.0);
        assert!(t[2].is_infinite());
        assert!(t[3].is_infinite());
    }

    #[test]
    fn hitting_times_linear_system_matches_chain() {
        // Same descending chain but expressed stochastically.
        let size = 6usize;
        let mut rows = Vec::new();
        for y in 0..size {
            rows.push(vec![(size - 1, 1.0)]);
            rows.push(vec![(y.saturating_sub(1usize), 1.0)]);
        }
        let mut op = TransitionOperator::stochastic("y", size, 2, vec![rows]);
        op = op.with_null_action(1);
        let t = hitting_times(&op, &[0]).unwrap();
        for (y, &v) in t.iter().enumerate() {
            assert!((v - y as f64).abs() < 1e-9, "state {y}: {v}");
        }
    }

    #[test]
    fn bog_flip_and_precedence() {
        let task = BogTask {
            bits: 3,
            accepting: vec![0b111],
            precedence: vec![(1, 0)], // bit1 requires bit0 == 0
            goal_map: HashMap::new(),
            resets: vec![],
            deadlines: HashMap::new(),
        };
        let op = build_bog_operator(&task).unwrap();
        assert_eq!(op.successor(0b000, 0, 0, 0), 0b001);
        // bit1 blocked once bit0 is set
        assert_eq!(op.successor(0b001, 1, 0, 0), 0b001);
        assert_eq!(op.successor(0b000, 1, 0, 0), 0b010);
        // no reverse flips
        assert_eq!(op.successor(0b001, 0, 0, 0), 0b001);
    }

    #[test]
    fn cyclic_precedence_makes_task_impossible() {
        let task = BogTask {
            bits: 3,
            accepting: vec![0b111],
            precedence: vec![(0, 1), (1, 2), (2, 0)],
            goal_map: HashMap::new(),
            resets: vec![],
            deadlines: HashMap::new(),
        };
        let op = build_bog_operator(&task).unwrap();
        let problem = sublimate(&op, &[0b111], 0, usize::MAX, 6);
        let (kappa, _, _) = feasibility_iteration(&problem).unwrap();
        for t in 0..=6 {
            assert_eq!(kappa.get(0b000, t), 0.0);
        }
    }

    #[test]
    fn constrained_query_succeeds_exactly_at_the_hitting_time() {
        use crate::model::{make_gridworld, ActionAvailability, Availability, GRID_STAY};
        // Corridor of 5 cells, goal at the far end (4 steps), one chain.
        let base = make_gridworld(5, 1, &[], true).unwrap();
        let mut f = ActionAvailability::new();
        f.add_goal(Availability::always("g", 4, Some(GRID_STAY), 1.0));
        let goals = vec![GoalSpec { id: "g".into(), effects: vec![] }];
        let chain = crate::model::make_chain_space("c", 8).unwrap();
        let space = SecondarySpace::build("c", chain, vec![0], 20).unwrap();
        let ontology = Ontology::build(
            base,
            vec![space],
            ModeFunction::defective_only(1),
            f,
            goals,
            vec![],
            20,
        )
        .unwrap();
        // Exactly enough time: t_d = 4 <= hitting(4) = 4 succeeds.
        let outs = ontology.goal_operator_step(&StateVec::new(0, vec![4], 0), 0).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].induced, Some(0));
        assert_eq!(outs[0].state.x, 4);
        // One step short: t_d = 4 > hitting(3) = 3 fails as a self-map.
        let outs = ontology.goal_operator_step(&StateVec::new(0, vec![3], 0), 0).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].induced, None);
        assert_eq!(outs[0].state.t, 1);
    }

    #[test]
    fn two_rule_task_feasible_only_through_first_bit() {
        // Flipping D first is mandatory: D blocked once E or F are set.
        let task = BogTask {
            bits: 3,
            accepting: vec![0b111],
            precedence: vec![(0, 1), (0, 2)],
            goal_map: HashMap::new(),
            resets: vec![],
            deadlines: HashMap::new(),
        };
        let op = build_bog_operator(&task).unwrap();
        let problem = sublimate(&op, &[0b111], 0, usize::MAX, 6);
        let (kappa, _, _) = feasibility_iteration(&problem).unwrap();
        assert!(kappa.get(0b000, 0) == 1.0);
        assert_eq!(kappa.get(0b010, 0), 0.0);
        assert_eq!(kappa.get(0b100, 0), 0.0);
        assert!(kappa.get(0b001, 0) == 1.0);
    }
}
