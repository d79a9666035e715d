//! Command-line entry point: run scenarios, export empowerment maps, run
//! scaling benchmarks, replay life-long learning, validate scenario files.
//!
//! Exit codes: 0 success, 1 error, 2 golden mismatch.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spa_core::baseline::{bench_csv, large_grid_benchmark, scaling_benchmark};
use spa_core::error::SpaError;
use spa_core::lifelong::events_to_jsonl;
use spa_core::report::{empowerment_map_csv, write_output};
use spa_core::scenario::runner::{run_scenario, Overrides, RunResult};
use spa_core::scenario::{builtins, load_scenario, Scenario, ScenarioDoc};

#[derive(Parser)]
#[command(name = "spa", version, about = "Feasibility-function planning engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioRef {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl ScenarioRef {
    fn load(&self, horizon_override: Option<usize>) -> Result<Scenario, SpaError> {
        let name = match (&self.builtin, &self.file) {
            (Some(b), None) => b.clone(),
            (None, Some(f)) => f.display().to_string(),
            _ => {
                return Err(SpaError::domain(
                    "exactly one of --builtin or --file is required",
                ))
            }
        };
        if let Some(tf) = horizon_override {
            // Rebuild from the document with the horizon replaced.
            let mut doc = match builtins::builtin(&name) {
                Some(d) => d,
                None => {
                    let text = std::fs::read_to_string(&name)?;
                    serde_json::from_str::<ScenarioDoc>(&text)?
                }
            };
            for env in doc.environments.iter_mut() {
                env.horizon = tf;
            }
            doc.build()
        } else {
            load_scenario(&name)
        }
    }
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory (default: print to stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plan length override.
    #[arg(long)]
    m: Option<usize>,
    /// Empowerment horizon override.
    #[arg(long)]
    n: Option<usize>,
    /// Horizon override.
    #[arg(long)]
    tf: Option<usize>,
    /// Empowerment variant override: full | marginal:x | marginal:<space> | task.
    #[arg(long)]
    emp: Option<String>,
    /// Output format for reports.
    #[arg(long, default_value = "json")]
    format: String,
    /// Evaluate plan leaves across threads.
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario's planning problem and write the plan report.
    Solve {
        #[command(flatten)]
        scenario: ScenarioRef,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Export per-cell empowerment heatmaps at one or more horizons.
    Empmap {
        #[command(flatten)]
        scenario: ScenarioRef,
        /// Comma-separated horizons.
        #[arg(long, default_value = "1,3,5", value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wall-clock scaling benchmarks.
    Bench {
        #[command(subcommand)]
        kind: BenchKind,
    },
    /// Run the life-long learning loop and write event logs.
    Lifelong {
        #[command(flatten)]
        scenario: ScenarioRef,
        #[command(flatten)]
        opts: CommonOpts,
        /// Seed recorded in outputs (planning itself is seed-free).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a built-in scenario document as JSON.
    Dump {
        #[arg(long)]
        builtin: String,
    },
    /// Schema-check a scenario file.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum BenchKind {
    /// Growing secondary-space count on a 3x3 grid vs the discounted
    /// value-iteration baseline.
    Scaling {
        #[arg(long, default_value_t = 4)]
        max_spaces: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factorized pipeline only, growing every space to N states.
    LargeGrid {
        /// Comma-separated N values (perfect squares).
        #[arg(long, default_value = "9,25,49,100", value_delimiter = ',')]
        n_values: Vec<usize>,
        /// Number of internal secondary state spaces.
        #[arg(long, default_value_t = 2)]
        niss: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, file: &str, contents: &str) -> Result<(), SpaError> {
    match out {
        Some(dir) => write_output(&dir.join(file), contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn print_golden(result: &RunResult) {
    for g in &result.golden {
        eprintln!(
            "[{}] {}: {}",
            if g.pass { "ok" } else { "MISMATCH" },
            g.key,
            g.detail
        );
    }
}

fn cmd_solve(scenario: &ScenarioRef, opts: &CommonOpts) -> Result<u8, SpaError> {
    let s = scenario.load(opts.tf)?;
    let overrides = Overrides {
        m: opts.m,
        n: opts.n,
        horizon: opts.tf,
        emp: opts.emp.clone(),
        parallel: opts.parallel,
    };
    let result = run_scenario(&s, &overrides)?;
    let json = serde_json::to_string_pretty(&result)?;
    emit(&opts.out, "plan_report.json", &json)?;
    if opts.format == "csv" {
        if let Some(report) = &result.plan_report {
            emit(&opts.out, "plan_report.csv", &report.to_csv())?;
        }
    }
    print_golden(&result);
    Ok(if result.all_green() { 0 } else { 2 })
}

fn cmd_empmap(
    scenario: &ScenarioRef,
    n_list: &[usize],
    out: &Option<PathBuf>,
) -> Result<u8, SpaError> {
    let s = scenario.load(None)?;
    let env = &s.envs[0];
    if !env.ontology.base.deterministic {
        return Err(SpaError::unsupported(
            "empowerment maps need a deterministic operator; use the channel-capacity path for stochastic ones",
        ));
    }
    let (w, h) = env.grid;
    for &n in n_list {
        if n == 0 {
            return Err(SpaError::domain("empowerment horizon must be >= 1"));
        }
        let csv = empowerment_map_csv(&env.ontology.base, w, h, n, 0)?;
        emit(out, &format!("empmap_n{n}.csv"), &csv)?;
    }
    Ok(0)
}

fn cmd_lifelong(scenario: &ScenarioRef, opts: &CommonOpts, seed: u64) -> Result<u8, SpaError> {
    let s = scenario.load(opts.tf)?;
    let overrides = Overrides {
        m: opts.m,
        n: opts.n,
        horizon: opts.tf,
        emp: opts.emp.clone(),
        parallel: opts.parallel,
    };
    let result = run_scenario(&s, &overrides)?;
    for (i, log) in result.lifelong_logs.iter().enumerate() {
        emit(&opts.out, &format!("events_env{}.jsonl", i + 1), &events_to_jsonl(log)?)?;
    }
    let transfer = serde_json::json!({
        "scenario": result.name,
        "seed": seed,
        "aux": result.aux,
        "golden": result.golden,
    });
    emit(&opts.out, "transfer_report.json", &serde_json::to_string_pretty(&transfer)?)?;
    print_golden(&result);
    Ok(if result.all_green() { 0 } else { 2 })
}

fn run() -> Result<u8, SpaError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve { scenario, opts } => cmd_solve(scenario, opts),
        Command::Empmap { scenario, n_list, out } => cmd_empmap(scenario, n_list, out),
        Command::Bench { kind } => match kind {
            BenchKind::Scaling { max_spaces, trials, depth, n, seed, out } => {
                let rows = scaling_benchmark(*max_spaces, *trials, *depth, *n, *seed)?;
                emit(out, "bench_scaling.csv", &bench_csv(&rows))?;
                Ok(0)
            }
            BenchKind::LargeGrid { n_values, niss, depth, n, seed, out } => {
                let rows = large_grid_benchmark(n_values, *niss, *depth, *n, *seed)?;
                emit(out, "bench_large_grid.csv", &bench_csv(&rows))?;
                Ok(0)
            }
        },
        Command::Lifelong { scenario, opts, seed } => cmd_lifelong(scenario, opts, *seed),
        Command::Dump { builtin } => {
            let doc = builtins::builtin(builtin).ok_or_else(|| {
                SpaError::domain(format!(
                    "unknown builtin {builtin} (available: {})",
                    builtins::BUILTIN_NAMES.join(", ")
                ))
            })?;
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(0)
        }
        Command::Validate { file } => {
            let text = std::fs::read_to_string(file)?;
            let doc: ScenarioDoc = serde_json::from_str(&text).map_err(|e| SpaError::Schema {
                path: format!("{}:{}:{}", file.display(), e.line(), e.column()),
                message: e.to_string(),
            })?;
            doc.build()?;
            eprintln!("ok: {} ({} environments)", doc.name, doc.environments.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
