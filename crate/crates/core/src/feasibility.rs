//! Backward-recursion solver for goal feasibility.
//!
//! Produces, for one goal on one state space, the cumulative feasibility
//! table `kappa(x, t)`, the time-minimizing policy, and the state-time
//! feasibility function (STFF) `eta`: a sub-stochastic map from every start
//! state-time to the distribution of termination events, split into
//! goal-success events and task-failure events. Together the two sides sum
//! to one per start, which is what makes STFFs composable transition
//! operators.

use std::collections::HashMap;

use crate::error::{Result, SpaError};
use crate::model::TgMdp;

/// Dense table kappa(x, t) in [0, 1] of shape (num_states, horizon + 1).
#[derive(Debug, Clone)]
pub struct CumulativeFeasibility {
    pub num_states: usize,
    pub horizon: usize,
    values: Vec<f64>,
}

impl CumulativeFeasibility {
    fn zeros(num_states: usize, horizon: usize) -> Self {
        CumulativeFeasibility { num_states, horizon, values: vec![0.0; num_states * (horizon + 1)] }
    }

    #[inline]
    pub fn get(&self, x: usize, t: usize) -> f64 {
        if t > self.horizon {
            0.0
        } else {
            self.values[x * (self.horizon + 1) + t]
        }
    }

    #[inline]
    fn set(&mut self, x: usize, t: usize, v: f64) {
        self.values[x * (self.horizon + 1) + t] = v;
    }
}

/// Dense action table pi(x, t).
#[derive(Debug, Clone)]
pub struct Policy {
    pub num_states: usize,
    pub horizon: usize,
    actions: Vec<usize>,
}

impl Policy {
    fn zeros(num_states: usize, horizon: usize) -> Self {
        Policy { num_states, horizon, actions: vec![0; num_states * (horizon + 1)] }
    }

    #[inline]
    pub fn action(&self, x: usize, t: usize) -> usize {
        let t = t.min(self.horizon);
        self.actions[x * (self.horizon + 1) + t]
    }

    #[inline]
    fn set(&mut self, x: usize, t: usize, a: usize) {
        self.actions[x * (self.horizon + 1) + t] = a;
    }
}

/// A termination event: final state, final time, probability.
pub type Event = (usize, usize, f64);

/// State-time feasibility function for one policy/goal: sparse per start
/// (x, t), a list of success events (goal induced) and failure events (null
/// goal induced at the last state-time the goal was still achievable).
#[derive(Debug, Clone)]
pub struct Stff {
    pub goal: String,
    pub num_states: usize,
    pub horizon: usize,
    success: Vec<Vec<Event>>,
    failure: Vec<Vec<Event>>,
    /// False only if a failure side had to be approximated (never the case
    /// for the in-tree solvers; retained for forward compatibility).
    pub exact_failure: bool,
}

impl Stff {
    fn empty(goal: &str, num_states: usize, horizon: usize) -> Self {
        let cells = num_states * (horizon + 1);
        Stff {
            goal: goal.to_string(),
            num_states,
            horizon,
            success: vec![Vec::new(); cells],
            failure: vec![Vec::new(); cells],
            exact_failure: true,
        }
    }

    #[inline]
    fn idx(&self, x: usize, t: usize) -> usize {
        x * (self.horizon + 1) + t
    }

    pub fn success_events(&self, x: usize, t: usize) -> &[Event] {
        &self.success[self.idx(x, t)]
    }

    pub fn failure_events(&self, x: usize, t: usize) -> &[Event] {
        &self.failure[self.idx(x, t)]
    }

    /// Success mass summed over all final state-times.
    pub fn success_mass(&self, x: usize, t: usize) -> f64 {
        self.success_events(x, t).iter().map(|e| e.2).sum()
    }

    pub fn failure_mass(&self, x: usize, t: usize) -> f64 {
        self.failure_events(x, t).iter().map(|e| e.2).sum()
    }

    /// Total termination mass (must be 1 within solver tolerance).
    pub fn total_mass(&self, x: usize, t: usize) -> f64 {
        self.success_mass(x, t) + self.failure_mass(x, t)
    }

    /// CSV export: goal,x,t,x_f,t_f,p,event
    pub fn to_csv(&self) -> String {
        let mut out = String::from("goal,x,t,x_f,t_f,p,event\n");
        for x in 0..self.num_states {
            for t in 0..=self.horizon {
                for &(xf, tf, p) in self.success_events(x, t) {
                    out.push_str(&format!("{},{},{},{},{},{},success\n", self.goal, x, t, xf, tf, p));
                }
                for &(xf, tf, p) in self.failure_events(x, t) {
                    out.push_str(&format!("{},{},{},{},{},{},failure\n", self.goal, x, t, xf, tf, p));
                }
            }
        }
        out
    }
}

/// kappa recovered from an STFF by summing success events per start.
pub fn kappa_from_eta(stff: &Stff) -> CumulativeFeasibility {
    let mut kappa = CumulativeFeasibility::zeros(stff.num_states, stff.horizon);
    for x in 0..stff.num_states {
        for t in 0..=stff.horizon {
            kappa.set(x, t, stff.success_mass(x, t));
        }
    }
    kappa
}

fn merge_scaled(into: &mut HashMap<(usize, usize), f64>, events: &[Event], scale: f64) {
    if scale == 0.0 {
        return;
    }
    for &(xf, tf, p) in events {
        *into.entry((xf, tf)).or_insert(0.0) += scale * p;
    }
}

fn collect(map: HashMap<(usize, usize), f64>) -> Vec<Event> {
    let mut v: Vec<Event> = map.into_iter().map(|((xf, tf), p)| (xf, tf, p)).collect();
    v.sort_unstable_by_key(|&(xf, tf, _)| (tf, xf));
    v
}

/// Solves the three coupled recursions by backward induction and fills in
/// the task-failure side, exactly.
///
/// The policy maximizes cumulative feasibility and, among maximizers, picks
/// the action minimizing the success-weighted completion time (ties break to
/// the lowest action index). Failure mass lands at the last state-time the
/// goal is still achievable under the policy; starts with zero feasibility
/// self-map with probability one.
pub fn feasibility_iteration(problem: &TgMdp) -> Result<(CumulativeFeasibility, Policy, Stff)> {
    problem.validate()?;
    let op = &problem.transition;
    let f = &problem.availability;
    let mode = problem.mode;
    let tf = problem.horizon;
    let nx = op.num_states;
    let na = op.num_actions;

    let mut kappa = CumulativeFeasibility::zeros(nx, tf);
    let mut policy = Policy::zeros(nx, tf);
    let mut stff = Stff::empty(&f.goal, nx, tf);
    // Success-weighted sum of completion times per (x, t); the Eq.-3 term.
    let mut time_sum = vec![0.0f64; nx * (tf + 1)];
    let ti = |x: usize, t: usize| x * (tf + 1) + t;

    // Horizon boundary: only immediate availability counts.
    for x in 0..nx {
        let mut best_a = 0;
        let mut best_v = f64::NEG_INFINITY;
        for a in 0..na {
            let v = f.query(x, a, tf);
            if v > best_v {
                best_v = v;
                best_a = a;
            }
        }
        kappa.set(x, tf, best_v);
        policy.set(x, tf, best_a);
        if best_v > 0.0 {
            stff.success[ti(x, tf)].push((x, tf, best_v));
            time_sum[ti(x, tf)] = tf as f64 * best_v;
        }
    }

    for t in (0..tf).rev() {
        for x in 0..nx {
            // kappa maximization over actions.
            let mut vals = vec![0.0f64; na];
            for (a, val) in vals.iter_mut().enumerate() {
                let fa = f.query(x, a, t);
                let mut cont = 0.0;
                op.for_row(x, a, t, mode, |nxs, p| {
                    cont += p * kappa.get(nxs, t + 1);
                });
                *val = fa + (1.0 - fa) * cont;
            }
            let max_v = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // Expected-time minimization over the argmax set.
            let mut best_a = usize::MAX;
            let mut best_time = f64::INFINITY;
            for a in 0..na {
                if vals[a] + 1e-12 < max_v {
                    continue;
                }
                let fa = f.query(x, a, t);
                let mut cont = 0.0;
                op.for_row(x, a, t, mode, |nxs, p| {
                    cont += p * time_sum[ti(nxs, t + 1)];
                });
                let score = t as f64 * fa + (1.0 - fa) * cont;
                if score + 1e-12 < best_time {
                    best_time = score;
                    best_a = a;
                }
            }
            let a = best_a;
            kappa.set(x, t, max_v);
            policy.set(x, t, a);

            let fa = f.query(x, a, t);
            let mut events: HashMap<(usize, usize), f64> = HashMap::new();
            if fa > 0.0 {
                events.insert((x, t), fa);
            }
            if fa < 1.0 {
                op.for_row(x, a, t, mode, |nxs, p| {
                    merge_scaled(&mut events, &stff.success[ti(nxs, t + 1)], (1.0 - fa) * p);
                });
            }
            let ev = collect(events);
            time_sum[ti(x, t)] = ev.iter().map(|&(_, tfin, p)| tfin as f64 * p).sum();
            stff.success[ti(x, t)] = ev;
        }
    }

    fill_failure(problem, &kappa, &policy, &mut stff);
    Ok((kappa, policy, stff))
}

/// Preconditions for the deterministic closed-form failure placement:
/// deterministic dynamics, 0/1 availability, single goal state.
fn closed_form_applies(problem: &TgMdp) -> bool {
    problem.transition.deterministic
        && problem.availability.is_deterministic()
        && problem.availability.goal_states().len() == 1
}

fn fill_failure(problem: &TgMdp, kappa: &CumulativeFeasibility, policy: &Policy, stff: &mut Stff) {
    let tf = problem.horizon;
    let nx = problem.transition.num_states;
    let ti = |x: usize, t: usize| x * (tf + 1) + t;

    if closed_form_applies(problem) {
        // Everything is deterministic, so kappa is 0/1: a start either
        // succeeds surely or self-maps as an immediate failure.
        for x in 0..nx {
            for t in 0..=tf {
                let k = kappa.get(x, t);
                if k <= 0.0 {
                    stff.failure[ti(x, t)] = vec![(x, t, 1.0)];
                } else if k < 1.0 {
                    // Preconditions guarantee this cannot happen; fall back
                    // to the exact recursion if it ever does.
                    fill_failure_recursive(problem, kappa, policy, stff);
                    return;
                }
            }
        }
        return;
    }
    fill_failure_recursive(problem, kappa, policy, stff);
}

/// Exact failure events by backward recursion, equivalent to forward
/// unrolling of the controlled dynamics: residual mass is emitted at
/// state-times from which no future success is possible.
fn fill_failure_recursive(
    problem: &TgMdp,
    kappa: &CumulativeFeasibility,
    policy: &Policy,
    stff: &mut Stff,
) {
    let op = &problem.transition;
    let f = &problem.availability;
    let mode = problem.mode;
    let tf = problem.horizon;
    let nx = op.num_states;
    let ti = |x: usize, t: usize| x * (tf + 1) + t;

    for x in 0..nx {
        let k = kappa.get(x, tf);
        if k <= 0.0 {
            stff.failure[ti(x, tf)] = vec![(x, tf, 1.0)];
        } else if k < 1.0 {
            stff.failure[ti(x, tf)] = vec![(x, tf, 1.0 - k)];
        }
    }
    for t in (0..tf).rev() {
        for x in 0..nx {
            if kappa.get(x, t) <= 0.0 {
                stff.failure[ti(x, t)] = vec![(x, t, 1.0)];
                continue;
            }
            let a = policy.action(x, t);
            let fa = f.query(x, a, t);
            let rem = 1.0 - fa;
            if rem <= 0.0 {
                continue;
            }
            let mut exp_next = 0.0;
            op.for_row(x, a, t, mode, |nxs, p| {
                exp_next += p * kappa.get(nxs, t + 1);
            });
            if exp_next <= 0.0 {
                // Last state-time the goal can be achieved from here.
                stff.failure[ti(x, t)] = vec![(x, t, rem)];
            } else {
                let mut events: HashMap<(usize, usize), f64> = HashMap::new();
                let mut succs: Vec<(usize, f64)> = Vec::new();
                op.for_row(x, a, t, mode, |nxs, p| succs.push((nxs, p)));
                for (nxs, p) in succs {
                    let evs = std::mem::take(&mut stff.failure[ti(nxs, t + 1)]);
                    merge_scaled(&mut events, &evs, rem * p);
                    stff.failure[ti(nxs, t + 1)] = evs;
                }
                stff.failure[ti(x, t)] = collect(events);
            }
        }
    }
}

/// Failure distribution from one start by forward unrolling of the
/// controlled transition dynamics; the independent cross-check for the
/// solver's failure side.
///
/// Residual (not-yet-succeeded) mass flows forward under the policy; it is
/// emitted as a failure event when it sits at a state-time with zero future
/// expected feasibility, when it reaches a zero-feasibility state-time, or
/// at the horizon.
pub fn forward_rollout_failure(
    problem: &TgMdp,
    policy: &Policy,
    kappa: &CumulativeFeasibility,
    start: (usize, usize),
) -> Result<Vec<Event>> {
    let op = &problem.transition;
    let f = &problem.availability;
    let mode = problem.mode;
    let tf = problem.horizon;
    let nx = op.num_states;
    if nx * (tf + 1) > 1_000_000 {
        return Err(SpaError::capacity(
            "forward rollout over 1e6 state-times; use the deterministic closed form",
        ));
    }
    let (x0, t0) = start;
    let mut events: HashMap<(usize, usize), f64> = HashMap::new();
    if kappa.get(x0, t0) <= 0.0 {
        return Ok(vec![(x0, t0, 1.0)]);
    }
    let mut mass: HashMap<usize, f64> = HashMap::new();
    mass.insert(x0, 1.0);
    for t in t0..=tf {
        let mut next: HashMap<usize, f64> = HashMap::new();
        for (&x, &m) in &mass {
            if m <= 0.0 {
                continue;
            }
            if kappa.get(x, t) <= 0.0 {
                *events.entry((x, t)).or_insert(0.0) += m;
                continue;
            }
            let a = policy.action(x, t);
            let fa = f.query(x, a, t);
            let rem = m * (1.0 - fa);
            if rem <= 0.0 {
                continue;
            }
            if t == tf {
                *events.entry((x, t)).or_insert(0.0) += rem;
                continue;
            }
            let mut exp_next = 0.0;
            op.for_row(x, a, t, mode, |nxs, p| {
                exp_next += p * kappa.get(nxs, t + 1);
            });
            if exp_next <= 0.0 {
                *events.entry((x, t)).or_insert(0.0) += rem;
            } else {
                op.for_row(x, a, t, mode, |nxs, p| {
                    *next.entry(nxs).or_insert(0.0) += rem * p;
                });
            }
        }
        mass = next;
    }
    Ok(collect(events))
}

/// Sequential composition of two STFFs over the same (space, time) domain.
///
/// The start flows through the first function's terminations; success means
/// the second goal is achieved, and first-stage failures propagate as
/// failures of the composition. Closure: the result is again a distribution
/// over termination events per start.
pub fn compose_stffs(first: &Stff, second: &Stff) -> Result<Stff> {
    if first.num_states != second.num_states || first.horizon != second.horizon {
        return Err(SpaError::domain("STFF composition: mismatched domains"));
    }
    let mut out = Stff::empty(&second.goal, first.num_states, first.horizon);
    for x in 0..first.num_states {
        for t in 0..=first.horizon {
            let mut succ: HashMap<(usize, usize), f64> = HashMap::new();
            let mut fail: HashMap<(usize, usize), f64> = HashMap::new();
            for &(x1, t1, p) in first.success_events(x, t) {
                merge_scaled(&mut succ, second.success_events(x1, t1), p);
                merge_scaled(&mut fail, second.failure_events(x1, t1), p);
            }
            merge_scaled(&mut fail, first.failure_events(x, t), 1.0);
            let i = out.idx(x, t);
            out.success[i] = collect(succ);
            out.failure[i] = collect(fail);
        }
    }
    Ok(out)
}
