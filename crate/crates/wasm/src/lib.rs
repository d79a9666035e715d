//! Browser bindings: a thin JSON facade over the planning engine for the
//! static demo page. Three operations are exposed: per-cell empowerment
//! maps on an editable gridworld, goal-feasibility maps with availability
//! deadlines, and full plan-report runs of the built-in worlds.
//!
//! All functions take and return JSON strings so the page needs no extra
//! glue beyond `JSON.parse`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use spa_core::empowerment::empowerment_deterministic;
use spa_core::feasibility::feasibility_iteration;
use spa_core::model::{make_gridworld, Availability, TgMdp, GRID_STAY};
use spa_core::scenario::runner::{run_scenario, Overrides};
use spa_core::scenario::{builtins, load_scenario};

fn err(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

fn parse_walls(walls_json: &str) -> Result<Vec<(usize, usize)>, String> {
    let walls: Vec<(usize, usize)> =
        serde_json::from_str(walls_json).map_err(|e| format!("walls: {e}"))?;
    Ok(walls)
}

/// Per-cell empowerment (bits) of a gridworld at horizon `n`.
///
/// `walls_json` is a JSON array of [row, col] pairs. Returns
/// `{ "bits": [[f64; width]; height], "max": f64 }`.
#[wasm_bindgen]
pub fn empowerment_map(width: usize, height: usize, walls_json: &str, n: usize) -> String {
    let walls = match parse_walls(walls_json) {
        Ok(w) => w,
        Err(e) => return err(e),
    };
    let op = match make_gridworld(width, height, &walls, false) {
        Ok(op) => op,
        Err(e) => return err(e),
    };
    if n == 0 {
        return err("horizon must be >= 1");
    }
    let mut rows = Vec::with_capacity(height);
    let mut max = 0.0f64;
    for r in 0..height {
        let mut row = Vec::with_capacity(width);
        for c in 0..width {
            let bits = match empowerment_deterministic(&op, r * width + c, n, 0) {
                Ok(b) => b,
                Err(e) => return err(e),
            };
            max = max.max(bits);
            row.push(bits);
        }
        rows.push(row);
    }
    json!({ "bits": rows, "max": max }).to_string()
}

/// Cumulative feasibility of reaching a goal cell whose availability is
/// open for `t` in `[t_lo, t_hi]`, from every cell at t = 0, plus the
/// expected arrival time of the success events.
///
/// Returns `{ "kappa": [[f64]], "arrival": [[f64 | null]] }`.
#[wasm_bindgen]
pub fn feasibility_map(
    width: usize,
    height: usize,
    walls_json: &str,
    goal_row: usize,
    goal_col: usize,
    t_lo: usize,
    t_hi: usize,
    horizon: usize,
) -> String {
    let walls = match parse_walls(walls_json) {
        Ok(w) => w,
        Err(e) => return err(e),
    };
    let op = match make_gridworld(width, height, &walls, false) {
        Ok(op) => op,
        Err(e) => return err(e),
    };
    if goal_row >= height || goal_col >= width {
        return err("goal cell out of bounds");
    }
    let mut f = Availability::new("goal");
    f.push(goal_row * width + goal_col, Some(GRID_STAY), t_lo, t_hi, 1.0);
    let problem = TgMdp::new(op, 0, f, horizon);
    let (kappa, _, stff) = match feasibility_iteration(&problem) {
        Ok(out) => out,
        Err(e) => return err(e),
    };
    let mut kappa_rows = Vec::with_capacity(height);
    let mut arrival_rows = Vec::with_capacity(height);
    for r in 0..height {
        let mut krow = Vec::with_capacity(width);
        let mut arow = Vec::with_capacity(width);
        for c in 0..width {
            let x = r * width + c;
            let k = kappa.get(x, 0);
            krow.push(k);
            if k > 0.0 {
                let events = stff.success_events(x, 0);
                let t_exp: f64 = events.iter().map(|&(_, tf, p)| tf as f64 * p).sum::<f64>() / k;
                arow.push(json!(t_exp));
            } else {
                arow.push(json!(null));
            }
        }
        kappa_rows.push(krow);
        arrival_rows.push(arow);
    }
    json!({ "kappa": kappa_rows, "arrival": arrival_rows }).to_string()
}

/// Runs a built-in world end to end and returns its full structured result
/// (plan report, golden diffs, auxiliary numbers).
#[wasm_bindgen]
pub fn run_builtin(name: &str) -> String {
    let scenario = match load_scenario(name) {
        Ok(s) => s,
        Err(e) => return err(e),
    };
    match run_scenario(&scenario, &Overrides::default()) {
        Ok(result) => serde_json::to_string(&result).unwrap_or_else(err),
        Err(e) => err(e),
    }
}

/// Names of the built-in worlds.
#[wasm_bindgen]
pub fn builtin_names() -> String {
    json!(builtins::BUILTIN_NAMES).to_string()
}

/// Geometry of a built-in world for drawing: grid size, named cells, walls
/// of the first mode, and the agent start.
#[wasm_bindgen]
pub fn builtin_geometry(name: &str) -> String {
    let doc = match builtins::builtin(name) {
        Some(d) => d,
        None => return err(format!("unknown builtin {name}")),
    };
    let scenario = match doc.build() {
        Ok(s) => s,
        Err(e) => return err(e),
    };
    let env_doc = &doc.environments[0];
    let env = &scenario.envs[0];
    let grid = env_doc.spaces.iter().find(|s| s.kind == "grid");
    let walls = grid
        .and_then(|g| g.params["modes"].as_array())
        .and_then(|m| m.first())
        .map(|m| m["walls"].clone())
        .unwrap_or(json!([]));
    // Goal cells from availability entries.
    let (w, _h) = env.grid;
    let goal_cells: Vec<serde_json::Value> = env_doc
        .availability
        .iter()
        .map(|a| json!({ "goal": a.goal, "row": a.x / w, "col": a.x % w, "t_window": a.t_window }))
        .collect();
    json!({
        "width": env.grid.0,
        "height": env.grid.1,
        "walls": walls,
        "cells": env_doc.cells,
        "goals": goal_cells,
        "start": { "row": env.start.x / w, "col": env.start.x % w },
        "hyper": { "m": doc.hyper.m, "n": doc.hyper.n, "emp": doc.hyper.emp },
    })
    .to_string()
}
