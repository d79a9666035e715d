//! Scenario documents and the built-in worlds.
//!
//! A scenario is a JSON document describing spaces, modes, availability,
//! the mode function, goals, tasks and hyper-parameters, plus golden
//! expectations. The loader turns a document into solved ontologies; the
//! runner dispatches to the right pipeline and diffs results against the
//! goldens.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::empowerment::EmpowermentVariant;
use crate::error::{Result, SpaError};
use crate::hierarchy::{
    build_bog_operator, BogTask, GoalSpec, ModeFunction, Ontology, SecondarySpace,
    SecondOrderTask, StateVec,
};
use crate::lifelong::FeatureSet;
use crate::model::{
    make_chain_space_multi, grid_index, ActionAvailability, Availability, TransitionOperator,
    GRID_ACTIONS,
};

pub mod builtins;
pub mod runner;

/// Root scenario document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub name: String,
    /// Pipeline: "plan" | "lifelong" | "empmap".
    pub run: String,
    pub hyper: HyperDoc,
    pub environments: Vec<EnvironmentDoc>,
    #[serde(default)]
    pub golden: serde_json::Map<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperDoc {
    /// Plan length (tree depth).
    pub m: usize,
    /// Empowerment horizon.
    pub n: usize,
    /// "full" | "marginal:x" | "marginal:<space>" | "task".
    pub emp: String,
    /// Restriction of the measured operator's policy alphabet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emp_goals: Option<Vec<String>>,
    /// Point-mass valence prior per unknown feature (bits).
    #[serde(default)]
    pub prior: f64,
    #[serde(default)]
    pub max_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_at_feature: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentDoc {
    pub spaces: Vec<SpaceDoc>,
    /// Mode names; indices are positions in this list.
    pub modes: Vec<String>,
    pub availability: Vec<AvailabilityDoc>,
    pub zeta: ZetaDoc,
    pub horizon: usize,
    pub agent_start: AgentStartDoc,
    #[serde(default)]
    pub goals: Vec<GoalDoc>,
    #[serde(default)]
    pub tasks: Vec<TaskDoc>,
    /// goal id -> feature tag (life-long scenarios).
    #[serde(default)]
    pub features: HashMap<String, String>,
    /// Named cells documenting the geometry (and probed by goldens).
    #[serde(default)]
    pub cells: HashMap<String, [usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub id: String,
    /// "grid" | "chain" | "flip".
    pub kind: String,
    pub params: Value,
    #[serde(default)]
    pub defective: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvailabilityDoc {
    pub goal: String,
    pub x: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    /// Inclusive window; None = open-ended.
    pub t_window: (usize, Option<usize>),
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaDoc {
    /// Per-space defective sets (mirrors the spaces' own lists).
    #[serde(default)]
    pub defective: HashMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defective_mode: Option<usize>,
    #[serde(default)]
    pub default_mode: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_selector: Option<ModeSelectorDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSelectorDoc {
    pub space: String,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentStartDoc {
    pub x: usize,
    pub comps: Vec<usize>,
    pub t: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalDoc {
    pub id: String,
    #[serde(default)]
    pub effects: Vec<EffectDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectDoc {
    pub space: String,
    pub action: usize,
}

/// Boolean ordered-goal task. `accepting` holds bit strings with character
/// i giving bit i ("110" = bits 0 and 1 set). The task's bit-vector space
/// is created automatically with the task's id, appended after the declared
/// spaces in document order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskDoc {
    pub id: String,
    pub bits: usize,
    pub accepting: Vec<String>,
    #[serde(default)]
    pub precedence: Vec<(usize, usize)>,
    /// bit index (as string key) -> goal id flipping it.
    pub goal_map: HashMap<String, String>,
    #[serde(default)]
    pub resets: Vec<usize>,
    /// bit index (as string key) -> last time the flip is available.
    #[serde(default)]
    pub deadlines: HashMap<String, usize>,
    /// Second-order actions induced at acceptance: (space, action).
    #[serde(default)]
    pub effects: Vec<EffectDoc>,
    /// Acceptance window (defaults to always).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_window: Option<(usize, Option<usize>)>,
}

fn parse_bits(s: &str, bits: usize) -> Result<usize> {
    if s.len() != bits {
        return Err(SpaError::Schema {
            path: "tasks.accepting".into(),
            message: format!("bit string {s:?} does not have {bits} bits"),
        });
    }
    let mut v = 0usize;
    for (i, c) in s.chars().enumerate() {
        match c {
            '1' => v |= 1 << i,
            '0' => {}
            _ => {
                return Err(SpaError::Schema {
                    path: "tasks.accepting".into(),
                    message: format!("bit string {s:?} has non-binary character"),
                })
            }
        }
    }
    Ok(v)
}

/// A built environment: the solved ontology plus start state and metadata.
pub struct EnvModel {
    pub ontology: Ontology,
    pub start: StateVec,
    pub features: FeatureSet,
    pub grid: (usize, usize),
    pub cells: HashMap<String, usize>,
    /// Task id -> second-order index in ontology.second_order.
    pub task_index: HashMap<String, usize>,
    /// Task id -> secondary-space index of its bit vector.
    pub task_space: HashMap<String, usize>,
}

/// A fully loaded scenario.
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub envs: Vec<EnvModel>,
}

pub fn parse_variant(s: &str, spaces: &[SecondarySpace]) -> Result<EmpowermentVariant> {
    match s {
        "full" => Ok(EmpowermentVariant::FullProduct),
        "task" => Ok(EmpowermentVariant::TaskSpace),
        "marginal:x" => Ok(EmpowermentVariant::MarginalBase),
        other => {
            if let Some(rest) = other.strip_prefix("marginal:") {
                let j = spaces
                    .iter()
                    .position(|sp| sp.id == rest)
                    .ok_or_else(|| SpaError::Schema {
                        path: "hyper.emp".into(),
                        message: format!("unknown space {rest}"),
                    })?;
                Ok(EmpowermentVariant::MarginalSpace(j))
            } else {
                Err(SpaError::Schema {
                    path: "hyper.emp".into(),
                    message: format!("unknown empowerment variant {other}"),
                })
            }
        }
    }
}

fn successor_table(op: &TransitionOperator, n: usize, na: usize) -> Vec<usize> {
    (0..n)
        .flat_map(|x| (0..na).map(move |a| op.successor(x, a, 0, 0)))
        .collect()
}

fn grid_from_params(id: &str, params: &Value, num_modes: usize) -> Result<(TransitionOperator, usize, usize)> {
    let width = params["width"].as_u64().ok_or_else(|| SpaError::Schema {
        path: format!("spaces.{id}.params.width"),
        message: "missing".into(),
    })? as usize;
    let height = params["height"].as_u64().ok_or_else(|| SpaError::Schema {
        path: format!("spaces.{id}.params.height"),
        message: "missing".into(),
    })? as usize;
    let empty = Vec::new();
    let mode_docs = params["modes"].as_array().unwrap_or(&empty);
    if !mode_docs.is_empty() && mode_docs.len() != num_modes {
        return Err(SpaError::Schema {
            path: format!("spaces.{id}.params.modes"),
            message: format!("{} grid modes for {} declared modes", mode_docs.len(), num_modes),
        });
    }
    let n = width * height;
    let na = GRID_ACTIONS.len();
    let mut per_mode: Vec<Vec<usize>> = Vec::new();
    if mode_docs.is_empty() {
        let op = crate::model::make_gridworld(width, height, &[], false)?;
        per_mode.push(successor_table(&op, n, na));
    } else {
        for (mi, md) in mode_docs.iter().enumerate() {
            if md["identity"].as_bool() == Some(true) {
                per_mode.push((0..n).flat_map(|x| std::iter::repeat(x).take(na)).collect());
                continue;
            }
            let walls: Vec<(usize, usize)> = md["walls"]
                .as_array()
                .unwrap_or(&empty)
                .iter()
                .map(|w| {
                    let pair = w.as_array().ok_or_else(|| SpaError::Schema {
                        path: format!("spaces.{id}.params.modes[{mi}].walls"),
                        message: "wall must be [row, col]".into(),
                    })?;
                    Ok((pair[0].as_u64().unwrap_or(0) as usize, pair[1].as_u64().unwrap_or(0) as usize))
                })
                .collect::<Result<_>>()?;
            let op = crate::model::make_gridworld(width, height, &walls, false)?;
            per_mode.push(successor_table(&op, n, na));
        }
    }
    let op = TransitionOperator::deterministic(id, n, na, per_mode)
        .with_null_action(crate::model::GRID_STAY);
    Ok((op, width, height))
}

impl EnvironmentDoc {
    /// Builds the environment: base grid, secondary spaces (declared plus
    /// one bit-vector space per task), goals wired to task bits, and the
    /// solved ontology.
    pub fn build(&self) -> Result<EnvModel> {
        let num_modes = self.modes.len().max(1);
        let mut base = None;
        let mut grid_dims = (0usize, 0usize);
        let mut spaces: Vec<SecondarySpace> = Vec::new();
        let mut space_ids: Vec<String> = Vec::new();
        for sd in &self.spaces {
            match sd.kind.as_str() {
                "grid" => {
                    if base.is_some() {
                        return Err(SpaError::Schema {
                            path: "spaces".into(),
                            message: "multiple grid spaces".into(),
                        });
                    }
                    let (op, w, h) = grid_from_params(&sd.id, &sd.params, num_modes)?;
                    grid_dims = (w, h);
                    base = Some(op);
                }
                "chain" => {
                    let size = sd.params["size"].as_u64().ok_or_else(|| SpaError::Schema {
                        path: format!("spaces.{}.params.size", sd.id),
                        message: "missing".into(),
                    })? as usize;
                    let jumps: Vec<usize> = sd.params["jumps"]
                        .as_array()
                        .map(|a| a.iter().map(|v| v.as_u64().unwrap_or(0) as usize).collect())
                        .unwrap_or_else(|| vec![size - 1]);
                    let op = make_chain_space_multi(&sd.id, size, &jumps)?;
                    let defective = merged_defective(sd, &self.zeta);
                    spaces.push(SecondarySpace::build(&sd.id, op, defective, self.horizon)?);
                    space_ids.push(sd.id.clone());
                }
                "flip" => {
                    // Two-state one-way bit: action 0 sets it, action 1 is null.
                    let op = TransitionOperator::deterministic(&sd.id, 2, 2, vec![vec![1, 0, 1, 1]])
                        .with_null_action(1);
                    let defective = merged_defective(sd, &self.zeta);
                    spaces.push(SecondarySpace::build(&sd.id, op, defective, self.horizon)?);
                    space_ids.push(sd.id.clone());
                }
                other => {
                    return Err(SpaError::Schema {
                        path: format!("spaces.{}.kind", sd.id),
                        message: format!("unknown kind {other}"),
                    })
                }
            }
        }
        let base = base.ok_or_else(|| SpaError::Schema {
            path: "spaces".into(),
            message: "no grid space".into(),
        })?;

        // Goals declared directly.
        let mut goals: Vec<GoalSpec> = Vec::new();
        for gd in &self.goals {
            let effects = gd
                .effects
                .iter()
                .map(|e| {
                    space_ids
                        .iter()
                        .position(|id| id == &e.space)
                        .map(|j| (j, e.action))
                        .ok_or_else(|| SpaError::Schema {
                            path: format!("goals.{}.effects", gd.id),
                            message: format!("unknown space {}", e.space),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            goals.push(GoalSpec { id: gd.id.clone(), effects });
        }

        // Task spaces and their second-order wiring.
        let mut second_order = Vec::new();
        let mut task_index = HashMap::new();
        let mut task_space = HashMap::new();
        for td in &self.tasks {
            let bog = BogTask {
                bits: td.bits,
                accepting: td
                    .accepting
                    .iter()
                    .map(|s| parse_bits(s, td.bits))
                    .collect::<Result<Vec<_>>>()?,
                precedence: td.precedence.clone(),
                goal_map: td
                    .goal_map
                    .iter()
                    .map(|(k, v)| {
                        k.parse::<usize>()
                            .map(|bit| (bit, v.clone()))
                            .map_err(|_| SpaError::Schema {
                                path: format!("tasks.{}.goal_map", td.id),
                                message: format!("bad bit index {k}"),
                            })
                    })
                    .collect::<Result<_>>()?,
                resets: td.resets.clone(),
                deadlines: HashMap::new(),
            };
            let op = build_bog_operator(&bog)?;
            let j = spaces.len();
            spaces.push(SecondarySpace::build(&td.id, op, Vec::new(), self.horizon)?);
            space_ids.push(td.id.clone());
            task_space.insert(td.id.clone(), j);
            // Wire goal effects: flipping bit k of this task's space.
            for (&bit, goal_id) in &bog.goal_map {
                let goal = goals
                    .iter_mut()
                    .find(|g| &g.id == goal_id)
                    .ok_or_else(|| SpaError::Schema {
                        path: format!("tasks.{}.goal_map", td.id),
                        message: format!("unknown goal {goal_id}"),
                    })?;
                goal.effects.push((j, bit));
            }
            let effects = td
                .effects
                .iter()
                .map(|e| {
                    space_ids
                        .iter()
                        .position(|id| id == &e.space)
                        .map(|sj| (sj, e.action))
                        .ok_or_else(|| SpaError::Schema {
                            path: format!("tasks.{}.effects", td.id),
                            message: format!("unknown space {}", e.space),
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            let (t_lo, t_hi) = match td.t_window {
                Some((lo, hi)) => (lo, hi.unwrap_or(usize::MAX)),
                None => (0, usize::MAX),
            };
            task_index.insert(td.id.clone(), second_order.len());
            second_order.push(SecondOrderTask {
                sigma_space: j,
                accepting: td
                    .accepting
                    .iter()
                    .map(|s| parse_bits(s, td.bits))
                    .collect::<Result<Vec<_>>>()?,
                t_lo,
                t_hi,
                effects,
                reset_bits: td.resets.clone(),
            });
        }

        // Availability, including task-bit deadlines.
        let mut f = ActionAvailability::new();
        let mut per_goal: HashMap<String, Availability> = HashMap::new();
        for ad in &self.availability {
            let entry = per_goal
                .entry(ad.goal.clone())
                .or_insert_with(|| Availability::new(&ad.goal));
            let t_hi = ad.t_window.1.unwrap_or(usize::MAX);
            entry.push(ad.x, ad.a, ad.t_window.0, t_hi, ad.p);
        }
        for td in &self.tasks {
            for (bit_str, &deadline) in &td.deadlines {
                let bit: usize = bit_str.parse().map_err(|_| SpaError::Schema {
                    path: format!("tasks.{}.deadlines", td.id),
                    message: format!("bad bit index {bit_str}"),
                })?;
                let goal_id = td.goal_map.get(bit_str).ok_or_else(|| SpaError::Schema {
                    path: format!("tasks.{}.deadlines", td.id),
                    message: format!("deadline for unmapped bit {bit}"),
                })?;
                if let Some(av) = per_goal.get_mut(goal_id) {
                    for e in av.entries.iter_mut() {
                        e.t_hi = e.t_hi.min(deadline);
                    }
                }
            }
        }
        for g in &goals {
            let av = per_goal.remove(&g.id).ok_or_else(|| SpaError::Schema {
                path: "availability".into(),
                message: format!("goal {} has no availability entries", g.id),
            })?;
            f.add_goal(av);
        }

        let selector = match &self.zeta.mode_selector {
            Some(sel) => {
                let j = space_ids
                    .iter()
                    .position(|id| id == &sel.space)
                    .ok_or_else(|| SpaError::Schema {
                        path: "zeta.mode_selector.space".into(),
                        message: format!("unknown space {}", sel.space),
                    })?;
                Some((j, sel.table.clone()))
            }
            None => None,
        };
        let zeta = ModeFunction {
            default_mode: self.zeta.default_mode,
            selector,
            defective_mode: self.zeta.defective_mode,
        };
        let ontology = Ontology::build(base, spaces, zeta, f, goals, second_order, self.horizon)?;
        let start = StateVec::new(self.agent_start.x, self.agent_start.comps.clone(), self.agent_start.t);
        if start.comps.len() != ontology.spaces.len() {
            return Err(SpaError::Schema {
                path: "agent_start.comps".into(),
                message: format!(
                    "{} components for {} secondary spaces (declared spaces then task spaces)",
                    start.comps.len(),
                    ontology.spaces.len()
                ),
            });
        }
        let features = FeatureSet {
            features: self.features.clone(),
            known: Default::default(),
            bindings: Default::default(),
        };
        let cells = self
            .cells
            .iter()
            .map(|(k, &[r, c])| (k.clone(), grid_index(grid_dims.0, r, c)))
            .collect();
        Ok(EnvModel {
            ontology,
            start,
            features,
            grid: grid_dims,
            cells,
            task_index,
            task_space,
        })
    }
}

fn merged_defective(sd: &SpaceDoc, zeta: &ZetaDoc) -> Vec<usize> {
    let mut d = sd.defective.clone();
    if let Some(extra) = zeta.defective.get(&sd.id) {
        for &x in extra {
            if !d.contains(&x) {
                d.push(x);
            }
        }
    }
    d.sort_unstable();
    d.dedup();
    d
}

impl ScenarioDoc {
    pub fn build(&self) -> Result<Scenario> {
        if self.environments.is_empty() {
            return Err(SpaError::Schema {
                path: "environments".into(),
                message: "at least one environment required".into(),
            });
        }
        let envs = self
            .environments
            .iter()
            .map(|e| e.build())
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario { doc: self.clone(), envs })
    }
}

/// Loads a scenario from a builtin name or a JSON file path.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(doc) = builtins::builtin(name_or_path) {
        return doc.build();
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(SpaError::domain(format!(
            "unknown builtin or missing file: {name_or_path} (builtins: {})",
            builtins::BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)?;
    let doc: ScenarioDoc = serde_json::from_str(&text).map_err(|e| SpaError::Schema {
        path: format!("{name_or_path}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    doc.build()
}
