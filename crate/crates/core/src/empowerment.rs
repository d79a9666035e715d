//! Empowerment: the channel capacity from action (or policy) sequences to
//! resulting state(-times).
//!
//! Deterministic operators reduce to reachable-set counting under forward
//! diffusion; stochastic channels go through Blahut-Arimoto. The factorized
//! variant counts final state-times of policy applications through the goal
//! operator, so its horizon `n` counts policies, not primitive steps.

use std::collections::{HashMap, HashSet};

use crate::error::{Result, SpaError};
use crate::hierarchy::{Ontology, StateVec};
use crate::product::{product_step, ProductParts};

/// Which projection of the reachable set is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpowermentVariant {
    /// Distinct full state-time vectors under fine-grained product steps.
    FullProduct,
    /// Distinct base-space states under fine-grained product steps.
    MarginalBase,
    /// Distinct states of one secondary space under fine-grained steps.
    MarginalSpace(usize),
    /// Distinct final state-times under policy applications (semi-Markov).
    TaskSpace,
}

/// Empowerment of a flat deterministic operator by n-step forward diffusion
/// under a uniform action distribution: log2 of the reachable-state count.
pub fn empowerment_deterministic(
    op: &crate::model::TransitionOperator,
    start: usize,
    n: usize,
    mode: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(SpaError::domain("empowerment horizon must be >= 1"));
    }
    if !op.deterministic {
        return Err(SpaError::unsupported(
            "stochastic operator: use the Blahut-Arimoto path",
        ));
    }
    let mut frontier: HashSet<usize> = HashSet::from([start]);
    for _ in 0..n {
        let mut next = HashSet::with_capacity(frontier.len() * op.num_actions);
        for &x in &frontier {
            for a in 0..op.num_actions {
                next.insert(op.successor(x, a, 0, mode));
            }
        }
        frontier = next;
    }
    Ok((frontier.len() as f64).log2())
}

/// Builds the explicit n-step channel p(x_final | action sequence) of a flat
/// operator. Guarded: at most 10^4 rows.
pub fn build_action_sequence_channel(
    op: &crate::model::TransitionOperator,
    start: usize,
    n: usize,
    mode: usize,
) -> Result<Vec<Vec<f64>>> {
    let rows = (op.num_actions as f64).powi(n as i32);
    if rows > 10_000.0 {
        return Err(SpaError::capacity(format!("channel with {rows} rows")));
    }
    let na = op.num_actions;
    let nx = op.num_states;
    let mut channel = Vec::with_capacity(rows as usize);
    let mut seq = vec![0usize; n];
    loop {
        // Propagate the start distribution through the fixed sequence.
        let mut dist = vec![0.0f64; nx];
        dist[start] = 1.0;
        for (step, &a) in seq.iter().enumerate() {
            let mut next = vec![0.0f64; nx];
            for x in 0..nx {
                if dist[x] == 0.0 {
                    continue;
                }
                let px = dist[x];
                op.for_row(x, a, step, mode, |nxs, p| next[nxs] += px * p);
            }
            dist = next;
        }
        channel.push(dist);
        // Next action sequence in lexicographic order.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(channel);
            }
            seq[i] += 1;
            if seq[i] < na {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Channel capacity in bits via Blahut-Arimoto on an explicit row-stochastic
/// channel p(y | input). Converges within `tol` or `max_iter` iterations.
pub fn blahut_arimoto_capacity(channel: &[Vec<f64>], tol: f64, max_iter: usize) -> Result<f64> {
    let rows = channel.len();
    if rows == 0 {
        return Err(SpaError::domain("empty channel"));
    }
    let cols = channel[0].len();
    let mut r = vec![1.0 / rows as f64; rows];
    let mut d = vec![0.0f64; rows];
    for _ in 0..max_iter {
        let mut q = vec![0.0f64; cols];
        for (i, row) in channel.iter().enumerate() {
            for (y, &p) in row.iter().enumerate() {
                q[y] += r[i] * p;
            }
        }
        for (i, row) in channel.iter().enumerate() {
            let mut di = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if p > 0.0 && q[y] > 0.0 {
                    di += p * (p / q[y]).log2();
                }
            }
            d[i] = di;
        }
        let lower: f64 = r.iter().zip(&d).map(|(&ri, &di)| ri * di).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < tol {
            return Ok(lower.max(0.0));
        }
        // Multiplicative update on the input distribution.
        let mut z = 0.0;
        for i in 0..rows {
            r[i] *= (d[i] * std::f64::consts::LN_2).exp();
            z += r[i];
        }
        for ri in r.iter_mut() {
            *ri /= z;
        }
    }
    let lower: f64 = r.iter().zip(&d).map(|(&ri, &di)| ri * di).sum();
    Ok(lower.max(0.0))
}

/// Empowerment of a flat operator routed by determinism: counting for
/// deterministic operators, Blahut-Arimoto otherwise.
pub fn empowerment_flat(
    op: &crate::model::TransitionOperator,
    start: usize,
    n: usize,
    mode: usize,
) -> Result<f64> {
    if op.deterministic {
        empowerment_deterministic(op, start, n, mode)
    } else {
        let channel = build_action_sequence_channel(op, start, n, mode)?;
        blahut_arimoto_capacity(&channel, 1e-6, 10_000)
    }
}

/// Fine-grained n-step diffusion of the factorized product dynamics,
/// counting the chosen projection. Deterministic parts only. Branches that
/// reach the horizon freeze and contribute their last valid state-time.
pub fn empowerment_product_diffusion(
    parts: &ProductParts,
    start: &StateVec,
    n: usize,
    horizon: usize,
    variant: EmpowermentVariant,
) -> Result<f64> {
    if n == 0 {
        return Err(SpaError::domain("empowerment horizon must be >= 1"));
    }
    if !parts.deterministic() {
        return Err(SpaError::unsupported("stochastic product diffusion"));
    }
    let na = parts.base.num_actions;
    let mut frontier: HashSet<(Vec<usize>, usize)> = HashSet::new();
    frontier.insert((start.comps.clone(), start.x));
    let mut frozen: HashSet<(Vec<usize>, usize, usize)> = HashSet::new();
    let mut t = start.t;
    for _ in 0..n {
        if t >= horizon {
            for (comps, x) in frontier.drain() {
                frozen.insert((comps, x, t));
            }
            break;
        }
        let mut next = HashSet::with_capacity(frontier.len() * na);
        for (comps, x) in &frontier {
            for a in 0..na {
                let out = product_step(parts, comps, *x, a, t);
                debug_assert_eq!(out.len(), 1);
                let (nc, nx, _) = out.into_iter().next().unwrap();
                next.insert((nc, nx));
            }
        }
        frontier = next;
        t += 1;
    }
    let count = match variant {
        EmpowermentVariant::FullProduct => {
            let mut set: HashSet<(Vec<usize>, usize, usize)> = frozen;
            for (comps, x) in frontier {
                set.insert((comps, x, t));
            }
            set.len()
        }
        EmpowermentVariant::MarginalBase => {
            let mut set: HashSet<usize> = frontier.iter().map(|(_, x)| *x).collect();
            set.extend(frozen.iter().map(|(_, x, _)| *x));
            set.len()
        }
        EmpowermentVariant::MarginalSpace(j) => {
            let mut set: HashSet<usize> = frontier.iter().map(|(c, _)| c[j]).collect();
            set.extend(frozen.iter().map(|(c, _, _)| c[j]));
            set.len()
        }
        EmpowermentVariant::TaskSpace => {
            return Err(SpaError::domain(
                "task-space empowerment runs on the goal operator, not fine-grained diffusion",
            ))
        }
    };
    Ok((count as f64).log2())
}

/// Temporally-extended semi-Markov empowerment on the factorized goal
/// operator: level-synchronous BFS over policy applications for n levels,
/// counting distinct final state-times. Nodes with no feasible policy (and
/// branches that hit the horizon) are terminal and carried into the count.
///
/// `goal_subset` restricts the operator's policy alphabet (e.g. to exclude
/// an item-acquisition task from the measured operator).
pub fn empowerment_factorized(
    ontology: &Ontology,
    start: &StateVec,
    n: usize,
    goal_subset: Option<&[usize]>,
) -> Result<f64> {
    if n == 0 {
        return Err(SpaError::domain("empowerment horizon must be >= 1"));
    }
    if !ontology.is_deterministic() {
        return Err(SpaError::unsupported(
            "factorized empowerment requires deterministic dynamics",
        ));
    }
    let goals: Vec<usize> = match goal_subset {
        Some(gs) => gs.to_vec(),
        None => (0..ontology.goals.len()).collect(),
    };
    let mut frontier: HashSet<StateVec> = HashSet::from([start.clone()]);
    let mut terminal: HashSet<StateVec> = HashSet::new();
    for _ in 0..n {
        let mut next = HashSet::new();
        for s in &frontier {
            let feasible: Vec<usize> = goals
                .iter()
                .copied()
                .filter(|&g| ontology.policy_feasible(s, g))
                .collect();
            if feasible.is_empty() {
                terminal.insert(s.clone());
                continue;
            }
            for g in feasible {
                for out in ontology.goal_operator_step(s, g)? {
                    debug_assert!((out.p - 1.0).abs() < 1e-9);
                    if out.terminal {
                        terminal.insert(out.state);
                    } else {
                        next.insert(out.state);
                    }
                }
            }
        }
        frontier = next;
    }
    let mut set = terminal;
    set.extend(frontier);
    Ok((set.len() as f64).log2())
}

/// Semi-Markov empowerment of a (possibly stochastic) goal operator via the
/// explicit policy-sequence channel and Blahut-Arimoto. Guarded by row
/// count; the stochastic fallback behind `empowerment_factorized`.
pub fn empowerment_semi_markov_ba(
    ontology: &Ontology,
    start: &StateVec,
    n: usize,
    goal_subset: Option<&[usize]>,
    tol: f64,
) -> Result<f64> {
    let goals: Vec<usize> = match goal_subset {
        Some(gs) => gs.to_vec(),
        None => (0..ontology.goals.len()).collect(),
    };
    let rows = (goals.len() as f64).powi(n as i32);
    if rows > 10_000.0 {
        return Err(SpaError::capacity(format!("policy channel with {rows} rows")));
    }
    let mut dists: Vec<HashMap<StateVec, f64>> = Vec::new();
    let mut seq = vec![0usize; n];
    'outer: loop {
        let mut dist: HashMap<StateVec, f64> = HashMap::from([(start.clone(), 1.0)]);
        for &gi in &seq {
            let g = goals[gi];
            let mut next: HashMap<StateVec, f64> = HashMap::new();
            for (s, p) in dist {
                // Terminal states stay put under further policies.
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
        dists.push(dist);
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            seq[i] += 1;
            if seq[i] < goals.len() {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
    // Index the union of support states to build the channel matrix.
    let mut index: HashMap<StateVec, usize> = HashMap::new();
    for d in &dists {
        for s in d.keys() {
            let next_id = index.len();
            index.entry(s.clone()).or_insert(next_id);
        }
    }
    let cols = index.len();
    let channel: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| {
            let mut row = vec![0.0; cols];
            for (s, &p) in d {
                row[index[s]] = p;
            }
            row
        })
        .collect();
    blahut_arimoto_capacity(&channel, tol, 10_000)
}

/// Dispatches an empowerment evaluation for one state of an ontology.
pub fn empowerment(
    ontology: &Ontology,
    parts: &ProductParts,
    state: &StateVec,
    n: usize,
    variant: EmpowermentVariant,
    goal_subset: Option<&[usize]>,
) -> Result<f64> {
    match variant {
        EmpowermentVariant::TaskSpace => empowerment_factorized(ontology, state, n, goal_subset),
        v => empowerment_product_diffusion(parts, state, n, ontology.horizon, v),
    }
}
