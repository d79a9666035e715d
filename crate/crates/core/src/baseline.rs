//! Infinite-horizon discounted-reward value iteration on the explicit
//! product space, plus the wall-clock scaling harness comparing it against
//! the factorized pipeline.

use std::time::Instant;

use rand::Rng;

use crate::empowerment::EmpowermentVariant;
use crate::error::{Result, SpaError};
use crate::hierarchy::{GoalSpec, ModeFunction, Ontology, SecondarySpace, StateVec};
use crate::model::{make_chain_space, make_gridworld, ActionAvailability, Availability, GRID_STAY};
use crate::planning::{bfs_plan_search, select_best_plan, Evaluator};
use crate::product::{product_step, ProductIndexer, ProductParts};
use crate::random::rng;

/// Default memory guard for materialized baselines (4 GiB), overridable via
/// the SPA_GUARD_BYTES environment variable.
pub fn guard_bytes() -> u64 {
    std::env::var("SPA_GUARD_BYTES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4 * 1024 * 1024 * 1024)
}

/// An explicit discounted-reward problem over a flattened product space:
/// the operator is materialized sparsely, one row per (state, action).
pub struct IhdrProblem {
    pub num_states: usize,
    pub num_actions: usize,
    /// rows[s * num_actions + a] = sparse successor distribution.
    pub rows: Vec<Vec<(u32, f64)>>,
    pub reward: Vec<f64>,
    pub discount: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

pub struct IhdrSolution {
    pub values: Vec<f64>,
    pub policy: Vec<u32>,
    pub iterations: usize,
    pub converged: bool,
    pub seconds: f64,
}

/// Value iteration: V(s) = R(s) + gamma * max_a sum_s' P(s'|s,a) V(s'),
/// sup-norm stop.
pub fn ihdr_value_iteration(problem: &IhdrProblem) -> IhdrSolution {
    let start = Instant::now();
    let ns = problem.num_states;
    let na = problem.num_actions;
    let mut values = vec![0.0f64; ns];
    let mut next = vec![0.0f64; ns];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < problem.max_iterations {
        iterations += 1;
        let mut delta = 0.0f64;
        for s in 0..ns {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let mut v = 0.0;
                for &(nxt, p) in &problem.rows[s * na + a] {
                    v += p * values[nxt as usize];
                }
                if v > best {
                    best = v;
                }
            }
            let v = problem.reward[s] + problem.discount * best;
            delta = delta.max((v - values[s]).abs());
            next[s] = v;
        }
        std::mem::swap(&mut values, &mut next);
        if delta < problem.tolerance {
            converged = true;
            break;
        }
    }
    let mut policy = vec![0u32; ns];
    for s in 0..ns {
        let mut best = f64::NEG_INFINITY;
        let mut best_a = 0u32;
        for a in 0..na {
            let mut v = 0.0;
            for &(nxt, p) in &problem.rows[s * na + a] {
                v += p * values[nxt as usize];
            }
            if v > best {
                best = v;
                best_a = a as u32;
            }
        }
        policy[s] = best_a;
    }
    IhdrSolution { values, policy, iterations, converged, seconds: start.elapsed().as_secs_f64() }
}

/// Estimated bytes for materializing the sparse product rows (one Vec per
/// state-action with at least one entry) plus reward, two value tables and
/// the policy.
pub fn estimate_ihdr_bytes(parts: &ProductParts) -> u128 {
    let indexer = ProductIndexer::new(parts);
    let states = indexer.total() as u128;
    let na = parts.base.num_actions as u128;
    let row_bytes = std::mem::size_of::<Vec<(u32, f64)>>() as u128 + 16;
    states * (na * row_bytes + 8 + 8 + 8 + 4)
}

/// Materializes the stationary deterministic product (availability
/// deadlines folded out at t = 0) with death/satiation rewards.
pub fn build_ihdr_product(
    parts: &ProductParts,
    death_penalty: f64,
    satiated_reward: f64,
) -> Result<IhdrProblem> {
    if estimate_ihdr_bytes(parts) > guard_bytes() as u128 {
        return Err(SpaError::capacity(format!(
            "IHDR product needs ~{} bytes (guard {})",
            estimate_ihdr_bytes(parts),
            guard_bytes()
        )));
    }
    let indexer = ProductIndexer::new(parts);
    let total = indexer.total();
    let na = parts.base.num_actions;
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(total * na);
    let mut reward = vec![0.0f64; total];
    for flat in 0..total {
        let (comps, x) = indexer.unflatten(flat);
        let defective = parts
            .spaces
            .iter()
            .enumerate()
            .any(|(j, sp)| sp.is_defective(comps[j]));
        let all_max = parts
            .spaces
            .iter()
            .enumerate()
            .all(|(j, sp)| comps[j] == sp.op.num_states - 1);
        reward[flat] = if defective {
            death_penalty
        } else if all_max {
            satiated_reward
        } else {
            0.0
        };
        for a in 0..na {
            let out = product_step(parts, &comps, x, a, 0);
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(out.len());
            for (nc, nx, p) in out {
                row.push((indexer.flatten(&nc, nx) as u32, p));
            }
            rows.push(row);
        }
    }
    Ok(IhdrProblem {
        num_states: total,
        num_actions: na,
        rows,
        reward,
        discount: 0.95,
        tolerance: 1e-6,
        max_iterations: 10_000,
    })
}

/// One row of a benchmark table.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub method: String,
    pub num_secondary: usize,
    pub n_states: usize,
    pub depth: usize,
    pub emp_horizon: usize,
    pub trial: usize,
    pub seed: u64,
    pub seconds: f64,
    pub status: String,
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("method,num_secondary,N,M,n,trial,seed,seconds,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6},{}\n",
            r.method, r.num_secondary, r.n_states, r.depth, r.emp_horizon, r.trial, r.seed, r.seconds, r.status
        ));
    }
    out
}

/// Builds the benchmark world: a square grid base with defective mode, one
/// descending chain per secondary space, each jumped by a goal pinned to a
/// random distinct cell.
pub fn benchmark_world(
    grid_side: usize,
    chain_states: usize,
    num_chains: usize,
    horizon: usize,
    seed: u64,
) -> Result<(ProductParts, StateVec)> {
    let mut r = rng(seed);
    let base = make_gridworld(grid_side, grid_side, &[], true)?;
    let nx = base.num_states;
    let mut cells: Vec<usize> = Vec::new();
    while cells.len() < num_chains.min(nx) {
        let c = r.gen_range(0..nx);
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    let mut spaces = Vec::with_capacity(num_chains);
    let mut f = ActionAvailability::new();
    let mut goals = Vec::with_capacity(num_chains);
    for j in 0..num_chains {
        let chain = make_chain_space(format!("c{j}"), chain_states)?;
        spaces.push(SecondarySpace::build(format!("c{j}"), chain, vec![0], horizon)?);
        let goal_id = format!("g{j}");
        f.add_goal(Availability::always(&goal_id, cells[j % cells.len()], Some(GRID_STAY), 1.0));
        goals.push(GoalSpec { id: goal_id, effects: vec![(j, 0)] });
    }
    let parts = ProductParts {
        base,
        spaces,
        zeta: ModeFunction::defective_only(1),
        f,
        goals,
        second_order: vec![],
    };
    let start = StateVec::new(nx / 2, vec![chain_states - 1; num_chains], 0);
    Ok((parts, start))
}

/// Wall time of the full factorized pipeline: feasibility solves, forecast
/// operators, hitting times, tree search to `depth`, and empowerment at
/// every leaf.
pub fn time_spa_pipeline(
    parts: &ProductParts,
    start: &StateVec,
    horizon: usize,
    depth: usize,
    emp_horizon: usize,
) -> Result<f64> {
    let t0 = Instant::now();
    let ontology = Ontology::build(
        parts.base.clone(),
        parts.spaces.clone(),
        parts.zeta.clone(),
        parts.f.clone(),
        parts.goals.clone(),
        parts.second_order.clone(),
        horizon,
    )?;
    let tree = bfs_plan_search(&ontology, start, depth, None)?;
    let eval = Evaluator::new(&ontology, emp_horizon, EmpowermentVariant::TaskSpace, None);
    let _ = select_best_plan(&tree, &eval, &eval, false)?;
    Ok(t0.elapsed().as_secs_f64())
}

/// Fig.-9A-shaped comparison: fixed 3x3 grid, 13-state secondaries, growing
/// secondary count. IHDR rows beyond the memory guard are flagged
/// "exceeded" without running.
pub fn scaling_benchmark(
    max_spaces: usize,
    trials: usize,
    depth: usize,
    emp_horizon: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let grid_side = 3;
    let chain_states = 13;
    let horizon = 36; // 12 * sqrt(9)
    let mut rows = Vec::new();
    for count in 1..=max_spaces {
        for trial in 0..trials {
            let trial_seed = seed.wrapping_add(trial as u64).wrapping_add(1000 * count as u64);
            let (parts, start) = benchmark_world(grid_side, chain_states, count, horizon, trial_seed)?;
            let secs = time_spa_pipeline(&parts, &start, horizon, depth, emp_horizon)?;
            rows.push(BenchRow {
                method: "spa".into(),
                num_secondary: count,
                n_states: grid_side * grid_side,
                depth,
                emp_horizon,
                trial,
                seed: trial_seed,
                seconds: secs,
                status: "ok".into(),
            });
            match build_ihdr_product(&parts, -1000.0, 10.0) {
                Ok(problem) => {
                    let sol = ihdr_value_iteration(&problem);
                    rows.push(BenchRow {
                        method: "ihdr".into(),
                        num_secondary: count,
                        n_states: grid_side * grid_side,
                        depth,
                        emp_horizon,
                        trial,
                        seed: trial_seed,
                        seconds: sol.seconds,
                        status: if sol.converged { "ok".into() } else { "max-iterations".into() },
                    });
                }
                Err(SpaError::Capacity(msg)) => {
                    rows.push(BenchRow {
                        method: "ihdr".into(),
                        num_secondary: count,
                        n_states: grid_side * grid_side,
                        depth,
                        emp_horizon,
                        trial,
                        seed: trial_seed,
                        seconds: 0.0,
                        status: format!("exceeded: {msg}"),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}

/// Fig.-9B-shaped run: factorized pipeline only, every state space (grid
/// and secondaries) holding N states, horizon 12 * sqrt(N).
pub fn large_grid_benchmark(
    n_values: &[usize],
    num_chains: usize,
    depth: usize,
    emp_horizon: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in n_values {
        let side = (n as f64).sqrt().round() as usize;
        if side * side != n {
            rows.push(BenchRow {
                method: "spa".into(),
                num_secondary: num_chains,
                n_states: n,
                depth,
                emp_horizon,
                trial: 0,
                seed,
                seconds: 0.0,
                status: "skipped: N must be a perfect square".into(),
            });
            continue;
        }
        let horizon = (12.0 * (n as f64).sqrt()).ceil() as usize;
        let (parts, start) = benchmark_world(side, n, num_chains, horizon, seed)?;
        let secs = time_spa_pipeline(&parts, &start, horizon, depth, emp_horizon)?;
        rows.push(BenchRow {
            method: "spa".into(),
            num_secondary: num_chains,
            n_states: n,
            depth,
            emp_horizon,
            trial: 0,
            seed,
            seconds: secs,
            status: "ok".into(),
        });
    }
    Ok(rows)
}

/// Mean seconds per (method, count) from benchmark rows.
pub fn mean_seconds(rows: &[BenchRow], method: &str, count: usize) -> Option<f64> {
    let xs: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.num_secondary == count && r.status == "ok")
        .map(|r| r.seconds)
        .collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}
