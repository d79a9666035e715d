//! Discrete state spaces, action sets, transition operators and goal
//! availability: the ground-level objects every solver is parameterized by.
//!
//! States, actions, times and modes are dense `usize` indices; symbolic
//! labels are metadata only. Time is inclusive `{0, ..., T_f}`. Stationary
//! operators are stored once and answer any `t`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpaError};

/// Construction-time tolerance for row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance for solver identities (normalization, decompositions).
pub const SOLVER_TOL: f64 = 1e-9;

/// A finite discrete state space with an optional defective subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpace {
    pub id: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    /// Indices of defective states (inhibit low-level movement when occupied).
    #[serde(default)]
    pub defective: Vec<usize>,
}

impl StateSpace {
    pub fn new(id: impl Into<String>, size: usize) -> Self {
        StateSpace { id: id.into(), size, labels: None, defective: Vec::new() }
    }

    pub fn with_defective(mut self, defective: Vec<usize>) -> Self {
        self.defective = defective;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(SpaError::domain(format!("space {}: size must be >= 1", self.id)));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.size {
                return Err(SpaError::domain(format!(
                    "space {}: {} labels for {} states",
                    self.id,
                    labels.len(),
                    self.size
                )));
            }
        }
        if let Some(&d) = self.defective.iter().find(|&&d| d >= self.size) {
            return Err(SpaError::domain(format!(
                "space {}: defective index {} out of range",
                self.id, d
            )));
        }
        Ok(())
    }

    pub fn is_defective(&self, state: usize) -> bool {
        self.defective.contains(&state)
    }
}

/// An ordered action alphabet, optionally designating a null action.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionSet {
    pub id: String,
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_action: Option<usize>,
}

impl ActionSet {
    pub fn new(id: impl Into<String>, actions: Vec<&str>) -> Self {
        ActionSet {
            id: id.into(),
            actions: actions.into_iter().map(String::from).collect(),
            null_action: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.actions.is_empty() {
            return Err(SpaError::domain(format!("action set {}: empty", self.id)));
        }
        if let Some(n) = self.null_action {
            if n >= self.actions.len() {
                return Err(SpaError::domain(format!(
                    "action set {}: null action {} out of range",
                    self.id, n
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Time domain of an operator: stationary answers identically for all `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Stationary,
    Finite(usize),
}

/// A sparse probability row over next states.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
enum Kernel {
    /// Deterministic successor per (x, a); `usize::MAX` marks an undefined row.
    Deterministic(Vec<usize>),
    /// Sparse stochastic rows per (x, a).
    Sparse(Vec<SparseRow>),
}

/// Time/mode-indexed conditional distribution P(x'|x, a, t, e) over a
/// discrete state space; the universal dynamics object.
///
/// Stationary kernels are stored per mode; non-stationary operators keep a
/// per-(t, mode) override table (used by materialized product oracles).
#[derive(Debug, Clone)]
pub struct TransitionOperator {
    pub id: String,
    pub num_states: usize,
    pub num_actions: usize,
    pub num_modes: usize,
    pub horizon: Horizon,
    pub deterministic: bool,
    pub null_action: Option<usize>,
    /// Stationary kernel per mode.
    kernels: Vec<Kernel>,
    /// Non-stationary overrides keyed by (t, mode); falls back to `kernels`.
    timed: Option<HashMap<(usize, usize), Kernel>>,
}

impl TransitionOperator {
    /// Builds a deterministic stationary operator from successor tables,
    /// one table per mode, each of length `num_states * num_actions`.
    pub fn deterministic(
        id: impl Into<String>,
        num_states: usize,
        num_actions: usize,
        per_mode: Vec<Vec<usize>>,
    ) -> Self {
        let num_modes = per_mode.len().max(1);
        TransitionOperator {
            id: id.into(),
            num_states,
            num_actions,
            num_modes,
            horizon: Horizon::Stationary,
            deterministic: true,
            null_action: None,
            kernels: per_mode.into_iter().map(Kernel::Deterministic).collect(),
            timed: None,
        }
    }

    /// Builds a stochastic stationary operator from sparse rows per mode.
    pub fn stochastic(
        id: impl Into<String>,
        num_states: usize,
        num_actions: usize,
        per_mode: Vec<Vec<SparseRow>>,
    ) -> Self {
        let num_modes = per_mode.len().max(1);
        TransitionOperator {
            id: id.into(),
            num_states,
            num_actions,
            num_modes,
            horizon: Horizon::Stationary,
            deterministic: false,
            null_action: None,
            kernels: per_mode.into_iter().map(Kernel::Sparse).collect(),
            timed: None,
        }
    }

    pub fn with_null_action(mut self, a: usize) -> Self {
        self.null_action = Some(a);
        self
    }

    /// Installs a non-stationary override for (t, mode) as sparse rows.
    pub fn set_timed_rows(&mut self, t: usize, mode: usize, rows: Vec<SparseRow>) {
        let table = self.timed.get_or_insert_with(HashMap::new);
        table.insert((t, mode), Kernel::Sparse(rows));
        if let Horizon::Finite(tf) = self.horizon {
            if t > tf {
                self.horizon = Horizon::Finite(t);
            }
        } else if self.timed.is_some() {
            self.horizon = Horizon::Finite(t);
        }
        self.deterministic = false;
    }

    fn kernel(&self, t: usize, mode: usize) -> &Kernel {
        if let Some(table) = &self.timed {
            if let Some(k) = table.get(&(t, mode)) {
                return k;
            }
        }
        &self.kernels[mode]
    }

    /// Deterministic successor of (x, a) at (t, mode).
    pub fn successor(&self, x: usize, a: usize, t: usize, mode: usize) -> usize {
        match self.kernel(t, mode) {
            Kernel::Deterministic(map) => map[x * self.num_actions + a],
            Kernel::Sparse(rows) => {
                let row = &rows[x * self.num_actions + a];
                debug_assert!(row.len() == 1);
                row[0].0
            }
        }
    }

    /// Sparse row view of P(.|x, a, t, mode).
    pub fn row(&self, x: usize, a: usize, t: usize, mode: usize) -> SparseRow {
        match self.kernel(t, mode) {
            Kernel::Deterministic(map) => {
                let nx = map[x * self.num_actions + a];
                if nx == usize::MAX {
                    Vec::new()
                } else {
                    vec![(nx, 1.0)]
                }
            }
            Kernel::Sparse(rows) => rows[x * self.num_actions + a].clone(),
        }
    }

    /// Iterates a function over the entries of a row without allocating.
    pub fn for_row(&self, x: usize, a: usize, t: usize, mode: usize, mut f: impl FnMut(usize, f64)) {
        match self.kernel(t, mode) {
            Kernel::Deterministic(map) => {
                let nx = map[x * self.num_actions + a];
                if nx != usize::MAX {
                    f(nx, 1.0);
                }
            }
            Kernel::Sparse(rows) => {
                for &(nx, p) in &rows[x * self.num_actions + a] {
                    f(nx, p);
                }
            }
        }
    }

    /// The null-action Markov chain of one mode as dense successor list
    /// (deterministic) — errors if no null action or not deterministic.
    pub fn null_chain_deterministic(&self, mode: usize) -> Result<Vec<usize>> {
        let a = self
            .null_action
            .ok_or_else(|| SpaError::domain(format!("operator {}: no null action", self.id)))?;
        if !self.deterministic {
            return Err(SpaError::unsupported(format!(
                "operator {}: stochastic null chain",
                self.id
            )));
        }
        Ok((0..self.num_states).map(|x| self.successor(x, a, 0, mode)).collect())
    }

    /// The null-action Markov chain as dense row-major matrix.
    pub fn null_chain_matrix(&self, mode: usize) -> Result<Vec<f64>> {
        let a = self
            .null_action
            .ok_or_else(|| SpaError::domain(format!("operator {}: no null action", self.id)))?;
        let n = self.num_states;
        let mut m = vec![0.0; n * n];
        for x in 0..n {
            self.for_row(x, a, 0, mode, |nx, p| m[x * n + nx] += p);
        }
        Ok(m)
    }

    fn time_points(&self) -> Vec<usize> {
        match self.horizon {
            Horizon::Stationary => vec![0],
            Horizon::Finite(tf) => (0..=tf).collect(),
        }
    }

    /// Checks row-stochasticity and the deterministic flag; reports, never throws.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for mode in 0..self.num_modes {
            for t in self.time_points() {
                for x in 0..self.num_states {
                    for a in 0..self.num_actions {
                        let row = self.row(x, a, t, mode);
                        let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                        if (sum - 1.0).abs() > ROW_SUM_TOL {
                            violations.push(format!(
                                "row sum {:.12} at (x={}, a={}, t={}, e={})",
                                sum, x, a, t, mode
                            ));
                        }
                        if row.iter().any(|&(_, p)| p < 0.0) {
                            violations.push(format!(
                                "negative probability at (x={}, a={}, t={}, e={})",
                                x, a, t, mode
                            ));
                        }
                        if self.deterministic {
                            let ones = row.iter().filter(|&&(_, p)| (p - 1.0).abs() <= ROW_SUM_TOL).count();
                            if ones != 1 || row.len() != 1 {
                                violations.push(format!(
                                    "non-deterministic row at (x={}, a={}, t={}, e={})",
                                    x, a, t, mode
                                ));
                            }
                        }
                    }
                }
            }
        }
        violations
    }
}

/// Reports all row-stochasticity / flag violations of an operator.
pub fn validate_operator(op: &TransitionOperator) -> Vec<String> {
    op.validate()
}

/// Goal-availability: probability that goal `g` can be induced at (x, a, t).
///
/// Entries are sparse; absent entries default to 0. An entry may cover all
/// actions (`action: None`) and an inclusive time window. Overlapping entries
/// resolve by maximum so the query is order-independent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Availability {
    pub goal: String,
    pub entries: Vec<AvailEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvailEntry {
    pub x: usize,
    /// None = any action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<usize>,
    pub t_lo: usize,
    /// Inclusive; `usize::MAX` = open-ended.
    pub t_hi: usize,
    pub p: f64,
}

impl Availability {
    pub fn new(goal: impl Into<String>) -> Self {
        Availability { goal: goal.into(), entries: Vec::new() }
    }

    pub fn always(goal: impl Into<String>, x: usize, action: Option<usize>, p: f64) -> Self {
        let mut f = Availability::new(goal);
        f.push(x, action, 0, usize::MAX, p);
        f
    }

    pub fn push(&mut self, x: usize, action: Option<usize>, t_lo: usize, t_hi: usize, p: f64) {
        self.entries.push(AvailEntry { x, action, t_lo, t_hi, p });
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !(0.0..=1.0).contains(&e.p) {
                return Err(SpaError::domain(format!(
                    "availability {}: probability {} outside [0,1]",
                    self.goal, e.p
                )));
            }
        }
        Ok(())
    }

    pub fn query(&self, x: usize, a: usize, t: usize) -> f64 {
        let mut best = 0.0f64;
        for e in &self.entries {
            if e.x == x && e.t_lo <= t && t <= e.t_hi && e.action.map_or(true, |ea| ea == a) {
                best = best.max(e.p);
            }
        }
        best
    }

    /// True when every stored probability is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.entries.iter().all(|e| e.p == 0.0 || e.p == 1.0)
    }

    /// The set of states carrying any positive availability.
    pub fn goal_states(&self) -> Vec<usize> {
        let mut xs: Vec<usize> = self.entries.iter().filter(|e| e.p > 0.0).map(|e| e.x).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }
}

/// Action-availability F: per-goal availability of inducing each non-null
/// higher-order action vector; residual mass is the null vector.
///
/// The restriction of F to a single goal is the `Availability` used to solve
/// that goal's TG-MDP. Absent entries default to a point mass on the all-null
/// vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionAvailability {
    pub goals: Vec<String>,
    pub per_goal: HashMap<String, Availability>,
}

impl ActionAvailability {
    pub fn new() -> Self {
        ActionAvailability { goals: Vec::new(), per_goal: HashMap::new() }
    }

    pub fn add_goal(&mut self, f: Availability) {
        self.goals.push(f.goal.clone());
        self.per_goal.insert(f.goal.clone(), f);
    }

    pub fn restrict(&self, goal: &str) -> Option<&Availability> {
        self.per_goal.get(goal)
    }

    /// Total non-null mass at (x, a, t); must stay within 1 (+tolerance).
    pub fn total_mass(&self, x: usize, a: usize, t: usize) -> f64 {
        self.goals.iter().map(|g| self.per_goal[g].query(x, a, t)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.goals {
            self.per_goal[g].validate()?;
        }
        // Probe the pmf constraint at every stored entry's support.
        for g in &self.goals {
            for e in &self.per_goal[g].entries {
                let a = e.action.unwrap_or(0);
                let total = self.total_mass(e.x, a, e.t_lo);
                if total > 1.0 + ROW_SUM_TOL {
                    return Err(SpaError::domain(format!(
                        "action availability: mass {} > 1 at (x={}, a={}, t={})",
                        total, e.x, a, e.t_lo
                    )));
                }
            }
        }
        Ok(())
    }

    /// Deterministically fired goal at (x, a, t), if any. Errors if the
    /// availability is not 0/1-valued at this point.
    pub fn fired_goal(&self, x: usize, a: usize, t: usize) -> Result<Option<&str>> {
        let mut hit = None;
        for g in &self.goals {
            let p = self.per_goal[g].query(x, a, t);
            if p > 0.0 && p < 1.0 {
                return Err(SpaError::unsupported(format!(
                    "stochastic action availability at (x={}, a={}, t={})",
                    x, a, t
                )));
            }
            if p == 1.0 {
                if hit.is_some() {
                    return Err(SpaError::domain(format!(
                        "two goals available at once at (x={}, a={}, t={})",
                        x, a, t
                    )));
                }
                hit = Some(g.as_str());
            }
        }
        Ok(hit)
    }
}

impl Default for ActionAvailability {
    fn default() -> Self {
        Self::new()
    }
}

/// A finite-horizon goal-reachability problem over one state space: the unit
/// every feasibility solve consumes.
#[derive(Debug, Clone)]
pub struct TgMdp {
    pub transition: TransitionOperator,
    /// Mode the transition operator is fixed to for this problem.
    pub mode: usize,
    pub availability: Availability,
    pub horizon: usize,
}

impl TgMdp {
    pub fn new(transition: TransitionOperator, mode: usize, availability: Availability, horizon: usize) -> Self {
        TgMdp { transition, mode, availability, horizon }
    }

    pub fn validate(&self) -> Result<()> {
        self.availability.validate()?;
        if self.mode >= self.transition.num_modes {
            return Err(SpaError::domain(format!(
                "mode {} out of range for operator {}",
                self.mode, self.transition.id
            )));
        }
        for e in &self.availability.entries {
            if e.x >= self.transition.num_states {
                return Err(SpaError::domain(format!(
                    "availability state {} outside space of size {}",
                    e.x, self.transition.num_states
                )));
            }
        }
        Ok(())
    }
}

/// Gridworld actions in the order {up, down, left, right, stay}.
pub const GRID_ACTIONS: [&str; 5] = ["up", "down", "left", "right", "stay"];
pub const GRID_STAY: usize = 4;

/// Cell (row, col) to state index on a `width`-wide grid.
pub fn grid_index(width: usize, row: usize, col: usize) -> usize {
    row * width + col
}

/// Builds a deterministic stationary gridworld operator.
///
/// Moves into walls or out of bounds are identity transitions. Wall cells
/// keep self-loop rows so the operator stays total, but they are unreachable
/// from non-wall cells. Mode 0 is the movement mode; if `with_defective_mode`
/// is set, mode 1 maps every (x, a) to x.
pub fn make_gridworld(
    width: usize,
    height: usize,
    walls: &[(usize, usize)],
    with_defective_mode: bool,
) -> Result<TransitionOperator> {
    if width == 0 || height == 0 {
        return Err(SpaError::domain("gridworld dimensions must be >= 1"));
    }
    for &(r, c) in walls {
        if r >= height || c >= width {
            return Err(SpaError::domain(format!("wall cell ({r},{c}) out of bounds")));
        }
    }
    let n = width * height;
    let na = GRID_ACTIONS.len();
    let is_wall = |r: usize, c: usize| walls.iter().any(|&(wr, wc)| wr == r && wc == c);
    let mut map = vec![0usize; n * na];
    for r in 0..height {
        for c in 0..width {
            let x = grid_index(width, r, c);
            // (dr, dc) per action; stay is (0, 0).
            let deltas: [(isize, isize); 5] = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)];
            for (a, &(dr, dc)) in deltas.iter().enumerate() {
                let nr = r as isize + dr;
                let nc = c as isize + dc;
                let target = if nr < 0
                    || nc < 0
                    || nr >= height as isize
                    || nc >= width as isize
                    || is_wall(nr as usize, nc as usize)
                    || is_wall(r, c)
                {
                    x
                } else {
                    grid_index(width, nr as usize, nc as usize)
                };
                map[x * na + a] = target;
            }
        }
    }
    let mut per_mode = vec![map];
    if with_defective_mode {
        let ident: Vec<usize> = (0..n).flat_map(|x| std::iter::repeat(x).take(na)).collect();
        per_mode.push(ident);
    }
    Ok(TransitionOperator::deterministic(format!("grid{width}x{height}"), n, na, per_mode)
        .with_null_action(GRID_STAY))
}

/// Builds the descending-chain operator over `{y_0, ..., y_max}`: the active
/// action jumps every state to the top, the null action decrements with an
/// absorbing floor.
///
/// Action 0 is the active (jump) action, action 1 the null decrement.
pub fn make_chain_space(id: impl Into<String>, size: usize) -> Result<TransitionOperator> {
    if size < 2 {
        return Err(SpaError::domain("chain space needs at least 2 states"));
    }
    let top = size - 1;
    let mut map = vec![0usize; size * 2];
    for y in 0..size {
        map[y * 2] = top; // active: jump to top
        map[y * 2 + 1] = y.saturating_sub(1); // null: descend, floor absorbs
    }
    Ok(TransitionOperator::deterministic(id, size, 2, vec![map]).with_null_action(1))
}

/// Builds a chain-like operator whose active action jumps to an arbitrary
/// target state (used for partial warm-ups and custom transformations).
pub fn make_chain_space_jump_to(id: impl Into<String>, size: usize, target: usize) -> Result<TransitionOperator> {
    if size < 2 {
        return Err(SpaError::domain("chain space needs at least 2 states"));
    }
    if target >= size {
        return Err(SpaError::domain("jump target out of range"));
    }
    let mut map = vec![0usize; size * 2];
    for y in 0..size {
        map[y * 2] = target;
        map[y * 2 + 1] = y.saturating_sub(1);
    }
    Ok(TransitionOperator::deterministic(id, size, 2, vec![map]).with_null_action(1))
}

/// Chain with several jump actions: action k jumps every state to
/// `jumps[k]`, the last action is the null decrement with absorbing floor.
pub fn make_chain_space_multi(
    id: impl Into<String>,
    size: usize,
    jumps: &[usize],
) -> Result<TransitionOperator> {
    if size < 2 {
        return Err(SpaError::domain("chain space needs at least 2 states"));
    }
    if let Some(&j) = jumps.iter().find(|&&j| j >= size) {
        return Err(SpaError::domain(format!("jump target {j} out of range")));
    }
    let na = jumps.len() + 1;
    let mut map = vec![0usize; size * na];
    for y in 0..size {
        for (a, &target) in jumps.iter().enumerate() {
            map[y * na + a] = target;
        }
        map[y * na + jumps.len()] = y.saturating_sub(1);
    }
    Ok(TransitionOperator::deterministic(id, size, na, vec![map]).with_null_action(jumps.len()))
}

/// A static space: every action (including null) is the identity. Used for
/// binary task vectors parameterized elsewhere.
pub fn make_static_space(id: impl Into<String>, size: usize, num_actions: usize) -> TransitionOperator {
    let ident: Vec<usize> = (0..size).flat_map(|x| std::iter::repeat(x).take(num_actions)).collect();
    TransitionOperator::deterministic(id, size, num_actions, vec![ident])
        .with_null_action(num_actions - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_operator_validates() {
        let op = TransitionOperator::stochastic(
            "id2",
            2,
            1,
            vec![vec![vec![(0, 1.0)], vec![(1, 1.0)]]],
        );
        assert!(validate_operator(&op).is_empty());
    }

    #[test]
    fn short_row_reports_sum() {
        let op = TransitionOperator::stochastic("bad", 2, 1, vec![vec![
            vec![(0, 0.5), (1, 0.4)],
            vec![(1, 1.0)],
        ]]);
        let v = validate_operator(&op);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("row sum 0.9"), "{}", v[0]);
    }

    #[test]
    fn deterministic_flag_contradiction() {
        let mut op = TransitionOperator::stochastic("flag", 2, 1, vec![vec![
            vec![(0, 0.5), (1, 0.5)],
            vec![(1, 1.0)],
        ]]);
        op.deterministic = true;
        let v = validate_operator(&op);
        assert!(v.iter().any(|s| s.contains("non-deterministic row")));
    }

    #[test]
    fn one_by_one_grid_self_loops() {
        let g = make_gridworld(1, 1, &[], false).unwrap();
        for a in 0..5 {
            assert_eq!(g.successor(0, a, 0, 0), 0);
        }
    }

    #[test]
    fn grid_center_up() {
        let g = make_gridworld(3, 3, &[], false).unwrap();
        let center = grid_index(3, 1, 1);
        assert_eq!(g.successor(center, 0, 0, 0), grid_index(3, 0, 1));
    }

    #[test]
    fn grid_corner_one_step_reach() {
        // Derived by enumerating transitions: corner reaches {self, right, down}.
        let g = make_gridworld(3, 3, &[], false).unwrap();
        let corner = grid_index(3, 0, 0);
        let mut reach: Vec<usize> = (0..5).map(|a| g.successor(corner, a, 0, 0)).collect();
        reach.sort_unstable();
        reach.dedup();
        assert_eq!(reach.len(), 3);
    }

    #[test]
    fn grid_determinism_everywhere() {
        let g = make_gridworld(4, 3, &[(1, 1)], true).unwrap();
        assert!(validate_operator(&g).is_empty());
        assert!(g.deterministic);
    }

    #[test]
    fn wall_out_of_bounds_rejected() {
        assert!(make_gridworld(3, 3, &[(5, 0)], false).is_err());
    }

    #[test]
    fn chain_active_jumps_to_top() {
        let c = make_chain_space("y", 5).unwrap();
        assert_eq!(c.successor(2, 0, 0, 0), 4);
    }

    #[test]
    fn chain_floor_absorbs() {
        let c = make_chain_space("y", 5).unwrap();
        assert_eq!(c.successor(0, 1, 0, 0), 0);
    }

    #[test]
    fn chain_55_null_first_hit_is_54() {
        // Iterate the null chain from the top state; floor reached in 54 steps.
        let c = make_chain_space("y", 55).unwrap();
        let mut y = 54usize;
        let mut steps = 0;
        while y != 0 {
            y = c.successor(y, 1, 0, 0);
            steps += 1;
        }
        assert_eq!(steps, 54);
    }

    #[test]
    fn availability_defaults_and_windows() {
        let mut f = Availability::new("g");
        f.push(3, Some(4), 0, 2, 1.0);
        assert_eq!(f.query(3, 4, 1), 1.0);
        assert_eq!(f.query(3, 4, 3), 0.0);
        assert_eq!(f.query(3, 0, 1), 0.0);
        assert_eq!(f.query(2, 4, 1), 0.0);
    }
}
