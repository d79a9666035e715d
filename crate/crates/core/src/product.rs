//! Explicit Cartesian-product dynamics: the fine-grained one-step product
//! composition, its materialization into a flat transition operator (the
//! exact oracle for the factorized planners, guarded by size), and the
//! flattened hierarchical feasibility solve.

use crate::error::{Result, SpaError};
use crate::feasibility::{feasibility_iteration, CumulativeFeasibility, Policy, Stff};
use crate::hierarchy::{GoalSpec, ModeFunction, SecondarySpace, SecondOrderTask};
use crate::model::{ActionAvailability, Availability, TgMdp, TransitionOperator};

/// The raw parts of a product system, before any feasibility solving.
#[derive(Debug, Clone)]
pub struct ProductParts {
    pub base: TransitionOperator,
    pub spaces: Vec<SecondarySpace>,
    pub zeta: ModeFunction,
    pub f: ActionAvailability,
    pub goals: Vec<GoalSpec>,
    pub second_order: Vec<SecondOrderTask>,
}

impl ProductParts {
    pub fn deterministic(&self) -> bool {
        self.base.deterministic
            && self.spaces.iter().all(|s| s.op.deterministic)
            && self.goals.iter().all(|g| {
                self.f.restrict(&g.id).map_or(true, |a| a.is_deterministic())
            })
    }
}

/// Mixed-radix indexing of (components, base state) into one flat index.
#[derive(Debug, Clone)]
pub struct ProductIndexer {
    pub sizes: Vec<usize>,
    pub nx: usize,
}

impl ProductIndexer {
    pub fn new(parts: &ProductParts) -> Self {
        ProductIndexer {
            sizes: parts.spaces.iter().map(|s| s.op.num_states).collect(),
            nx: parts.base.num_states,
        }
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().product::<usize>() * self.nx
    }

    pub fn flatten(&self, comps: &[usize], x: usize) -> usize {
        let mut idx = 0usize;
        for (j, &c) in comps.iter().enumerate().rev() {
            idx = idx * self.sizes[j] + c;
        }
        idx * self.nx + x
    }

    pub fn unflatten(&self, flat: usize) -> (Vec<usize>, usize) {
        let x = flat % self.nx;
        let mut rest = flat / self.nx;
        let mut comps = Vec::with_capacity(self.sizes.len());
        for &n in &self.sizes {
            comps.push(rest % n);
            rest /= n;
        }
        (comps, x)
    }
}

/// One fine-grained step of the composed dynamics: the base moves under the
/// current mode, the fired goal (per the action-availability at (x, a, t))
/// drives its target spaces, all other spaces take null steps, and
/// second-order tasks fire on the post-step task vector.
///
/// Returns the joint distribution over (components, base state); stochastic
/// base dynamics and stochastic goal firing both fan out.
pub fn product_step(
    parts: &ProductParts,
    comps: &[usize],
    x: usize,
    a: usize,
    t: usize,
) -> Vec<(Vec<usize>, usize, f64)> {
    let mode = parts.zeta.mode(&parts.spaces, comps);
    // Goal-firing outcomes: (goal index or None, probability).
    let mut firings: Vec<(Option<usize>, f64)> = Vec::new();
    let mut total = 0.0;
    for (gi, goal) in parts.goals.iter().enumerate() {
        if let Some(avail) = parts.f.restrict(&goal.id) {
            let p = avail.query(x, a, t);
            if p > 0.0 {
                firings.push((Some(gi), p));
                total += p;
            }
        }
    }
    if total < 1.0 {
        firings.push((None, 1.0 - total));
    }

    let mut out = Vec::new();
    for (fired, pg) in firings {
        let mut actions: Vec<usize> = parts
            .spaces
            .iter()
            .map(|s| s.op.null_action.expect("secondary spaces carry a null action"))
            .collect();
        if let Some(gi) = fired {
            for &(j, act) in &parts.goals[gi].effects {
                actions[j] = act;
            }
        }
        let mut comps_next: Vec<usize> = parts
            .spaces
            .iter()
            .enumerate()
            .map(|(j, s)| s.op.successor(comps[j], actions[j], t, 0))
            .collect();
        for task in &parts.second_order {
            let sigma = comps_next[task.sigma_space];
            if task.accepting.contains(&sigma) && task.t_lo <= t + 1 && t + 1 <= task.t_hi {
                for &(j, act) in &task.effects {
                    comps_next[j] = parts.spaces[j].op.successor(comps[j], act, t, 0);
                }
                let mut s = comps_next[task.sigma_space];
                for &bit in &task.reset_bits {
                    s &= !(1usize << bit);
                }
                comps_next[task.sigma_space] = s;
            }
        }
        let mut row = Vec::new();
        parts.base.for_row(x, a, t, mode, |nx, p| row.push((nx, p)));
        for (nx, p) in row {
            out.push((comps_next.clone(), nx, pg * p));
        }
    }
    out
}

/// Materializes the full product transition operator row by row, for use as
/// an exact oracle. Guarded: the flattened space must stay within 10^6
/// states.
pub fn compose_product_operator(parts: &ProductParts, horizon: usize) -> Result<TransitionOperator> {
    let indexer = ProductIndexer::new(parts);
    let total = indexer.total();
    if total > 1_000_000 {
        return Err(SpaError::capacity(format!(
            "product space of {total} states; use the factorized path"
        )));
    }
    let na = parts.base.num_actions;
    let mut op = TransitionOperator::stochastic(
        "product",
        total,
        na,
        vec![vec![Vec::new(); total * na]],
    );
    for t in 0..=horizon {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total * na];
        for flat in 0..total {
            let (comps, x) = indexer.unflatten(flat);
            for a in 0..na {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for (comps_next, nx, p) in product_step(parts, &comps, x, a, t) {
                    let target = indexer.flatten(&comps_next, nx);
                    match row.iter_mut().find(|(s, _)| *s == target) {
                        Some((_, q)) => *q += p,
                        None => row.push((target, p)),
                    }
                }
                rows[flat * na + a] = row;
            }
        }
        op.set_timed_rows(t, 0, rows);
    }
    Ok(op)
}

/// Expands a base-space availability into the flattened product space,
/// optionally restricted to component states of one space (used to encode
/// task-accepting conditions in oracle problems).
pub fn flatten_availability(
    parts: &ProductParts,
    base: &Availability,
    component_constraint: Option<(usize, Vec<usize>)>,
) -> Availability {
    let indexer = ProductIndexer::new(parts);
    let mut out = Availability::new(&base.goal);
    let combos = indexer.sizes.iter().product::<usize>();
    for entry in &base.entries {
        for combo in 0..combos {
            let mut rest = combo;
            let mut comps = Vec::with_capacity(indexer.sizes.len());
            for &n in &indexer.sizes {
                comps.push(rest % n);
                rest /= n;
            }
            if let Some((j, ref allowed)) = component_constraint {
                if !allowed.contains(&comps[j]) {
                    continue;
                }
            }
            out.push(indexer.flatten(&comps, entry.x), entry.action, entry.t_lo, entry.t_hi, entry.p);
        }
    }
    out
}

/// Exact hierarchical feasibility solve on the flattened product space; the
/// test oracle for the factorized decompositions.
pub fn hierarchical_obe_oracle(
    product: &TransitionOperator,
    availability: Availability,
    horizon: usize,
) -> Result<(CumulativeFeasibility, Policy, Stff)> {
    let problem = TgMdp::new(product.clone(), 0, availability, horizon);
    feasibility_iteration(&problem)
}
