//! Seeded instance generators shared by the randomized test suites and the
//! benchmark harness. Everything is driven by a ChaCha stream so runs are
//! reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hierarchy::{GoalSpec, ModeFunction, SecondarySpace};
use crate::model::{
    make_chain_space, make_gridworld, ActionAvailability, Availability, SparseRow, TgMdp,
    TransitionOperator, GRID_STAY,
};
use crate::product::ProductParts;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random row-stochastic sparse row with up to `max_support` successors.
fn random_row(rng: &mut ChaCha8Rng, num_states: usize, max_support: usize) -> SparseRow {
    let support = rng.gen_range(1..=max_support.min(num_states));
    let mut states: Vec<usize> = Vec::with_capacity(support);
    while states.len() < support {
        let s = rng.gen_range(0..num_states);
        if !states.contains(&s) {
            states.push(s);
        }
    }
    let mut weights: Vec<f64> = (0..support).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    states.into_iter().zip(weights).collect()
}

/// Random stochastic stationary operator (single mode).
pub fn random_stochastic_operator(
    rng: &mut ChaCha8Rng,
    num_states: usize,
    num_actions: usize,
) -> TransitionOperator {
    let rows: Vec<SparseRow> = (0..num_states * num_actions)
        .map(|_| random_row(rng, num_states, 3))
        .collect();
    TransitionOperator::stochastic("random", num_states, num_actions, vec![rows])
}

/// Random deterministic stationary operator (single mode).
pub fn random_deterministic_operator(
    rng: &mut ChaCha8Rng,
    num_states: usize,
    num_actions: usize,
) -> TransitionOperator {
    let map: Vec<usize> = (0..num_states * num_actions)
        .map(|_| rng.gen_range(0..num_states))
        .collect();
    TransitionOperator::deterministic("random-det", num_states, num_actions, vec![map])
}

/// Random flat TG-MDP with stochastic dynamics and availability values in
/// {0.5, 1} over random cells and time windows (absent cells are 0).
pub fn random_tg_mdp(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_actions: usize,
    max_horizon: usize,
) -> TgMdp {
    let nx = rng.gen_range(2..=max_states);
    let na = rng.gen_range(2..=max_actions);
    let horizon = rng.gen_range(1..=max_horizon);
    let op = random_stochastic_operator(rng, nx, na);
    let mut f = Availability::new("g");
    let entries = rng.gen_range(1..=3);
    for _ in 0..entries {
        let x = rng.gen_range(0..nx);
        let t_lo = rng.gen_range(0..=horizon);
        let t_hi = rng.gen_range(t_lo..=horizon);
        let p = [0.5, 1.0][rng.gen_range(0..2)];
        let action = if rng.gen_bool(0.5) { None } else { Some(rng.gen_range(0..na)) };
        f.push(x, action, t_lo, t_hi, p);
    }
    TgMdp::new(op, 0, f, horizon)
}

/// Options for random hierarchical (product) instances.
#[derive(Debug, Clone, Copy)]
pub struct HierOptions {
    pub max_grid: usize,
    pub max_chains: usize,
    pub max_chain_states: usize,
    pub max_horizon: usize,
    /// Couple internal states back into the base dynamics through a
    /// defective mode (deterministic base only; the decomposition theorem
    /// assumes deterministic dynamics in the coupled case).
    pub bidirectional: bool,
    /// Randomize the base dynamics (unidirectional instances only).
    pub stochastic_base: bool,
}

/// A random hierarchical instance: grid base, descending chains, a single
/// goal jumping the first chain, 0/1 availability. Returns the parts, the
/// goal's base-space availability and the horizon.
pub fn random_hierarchical_instance(
    rng: &mut ChaCha8Rng,
    opts: HierOptions,
) -> (ProductParts, Availability, usize) {
    let w = rng.gen_range(2..=opts.max_grid);
    let h = rng.gen_range(2..=opts.max_grid);
    let horizon = rng.gen_range(4..=opts.max_horizon);
    let base = if opts.stochastic_base && !opts.bidirectional {
        // Random slippage over the gridworld's deterministic skeleton.
        let det = make_gridworld(w, h, &[], false).unwrap();
        let nx = det.num_states;
        let na = det.num_actions;
        let mut rows: Vec<SparseRow> = Vec::with_capacity(nx * na);
        for x in 0..nx {
            for a in 0..na {
                let intended = det.successor(x, a, 0, 0);
                let slip = rng.gen_range(0.0..0.35);
                let mut row = vec![(intended, 1.0 - slip)];
                if slip > 0.0 {
                    let other = det.successor(x, rng.gen_range(0..na), 0, 0);
                    if other == intended {
                        row[0].1 += slip;
                    } else {
                        row.push((other, slip));
                    }
                }
                rows.push(row);
            }
        }
        TransitionOperator::stochastic("slippery-grid", nx, na, vec![rows]).with_null_action(GRID_STAY)
    } else {
        make_gridworld(w, h, &[], opts.bidirectional).unwrap()
    };

    let num_chains = rng.gen_range(1..=opts.max_chains);
    let mut spaces = Vec::with_capacity(num_chains);
    for j in 0..num_chains {
        let size = rng.gen_range(2..=opts.max_chain_states);
        let chain = make_chain_space(format!("c{j}"), size).unwrap();
        let defective = if opts.bidirectional { vec![0] } else { Vec::new() };
        spaces.push(SecondarySpace::build(format!("c{j}"), chain, defective, horizon).unwrap());
    }

    let goal_cell = rng.gen_range(0..base.num_states);
    let mut avail = Availability::new("g");
    let t_hi = if rng.gen_bool(0.5) { horizon } else { rng.gen_range(1..=horizon) };
    avail.push(goal_cell, None, 0, t_hi, 1.0);
    let mut f = ActionAvailability::new();
    f.add_goal(avail.clone());

    let zeta = if opts.bidirectional {
        ModeFunction::defective_only(1)
    } else {
        ModeFunction { default_mode: 0, selector: None, defective_mode: None }
    };
    let parts = ProductParts {
        base,
        spaces,
        zeta,
        f,
        goals: vec![GoalSpec { id: "g".into(), effects: vec![(0, 0)] }],
        second_order: vec![],
    };
    (parts, avail, horizon)
}
