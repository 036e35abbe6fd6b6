//! Config-driven experiment grid: every (algorithm, sigma, H) cell is run for
//! every seed, then per-seed and aggregate CSVs plus a manifest are written.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{rvi_run, AgentConfig, BonusPreset};
use crate::baseline::ucbvi_run;
use crate::envs::{
    build_frozen_lake, build_gambler_with, build_hard_instance, GamblerParams, HardInstanceSpec,
    LakeLayout,
};
use crate::error::{Error, Result};
use crate::harness::aggregate::{aggregate, write_aggregate_csv};
use crate::harness::regret::{compute_regret_with, RunRecord};
use crate::model::{DivergenceKind, DivergenceSpec, FiniteRmdp};
use crate::par::{map_slice, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentName {
    Gambler,
    FrozenLake,
    HardInstance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rvi,
    Ucbvi,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rvi => "rvi",
            Algorithm::Ucbvi => "ucbvi",
        }
    }
}

/// A config field that may hold one value or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentName,
    #[serde(default)]
    pub env_params: serde_json::Value,
    pub algorithm: OneOrMany<Algorithm>,
    pub divergence: DivergenceKind,
    pub sigma: OneOrMany<f64>,
    #[serde(rename = "H")]
    pub horizon: OneOrMany<usize>,
    #[serde(rename = "K")]
    pub episodes: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub bonus_preset: BonusPreset,
    /// Relative paths resolve against the working directory.
    pub output_dir: PathBuf,
    /// Failure probability inside the log factor.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct LakeParams {
    #[serde(default = "default_side")]
    grid_side: usize,
    #[serde(default = "default_layout")]
    layout: LakeLayout,
}

fn default_side() -> usize {
    4
}

fn default_layout() -> LakeLayout {
    LakeLayout::Canonical
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardParams {
    num_actions: usize,
    branch_prob: f64,
    #[serde(default)]
    special_action_index: usize,
    base_mean: f64,
    #[serde(default = "default_boost")]
    boost_factor: f64,
}

fn default_boost() -> f64 {
    3f64.sqrt()
}

fn params<T: serde::de::DeserializeOwned>(value: &serde_json::Value) -> Result<T> {
    let value = if value.is_null() {
        serde_json::Value::Object(Default::default())
    } else {
        value.clone()
    };
    serde_json::from_value(value).map_err(|e| Error::Config(format!("env_params: {e}")))
}

/// Builds the environment named in a config for one `(sigma, H)` cell.
pub fn build_environment(
    name: EnvironmentName,
    env_params: &serde_json::Value,
    horizon: usize,
    spec: DivergenceSpec,
) -> Result<FiniteRmdp> {
    match name {
        EnvironmentName::Gambler => {
            let p: GamblerParams = params(env_params)?;
            build_gambler_with(&p, horizon, spec)
        }
        EnvironmentName::FrozenLake => {
            let p: LakeParams = params(env_params)?;
            build_frozen_lake(p.grid_side, horizon, &p.layout, spec)
        }
        EnvironmentName::HardInstance => {
            let p: HardParams = params(env_params)?;
            let inst = build_hard_instance(&HardInstanceSpec {
                num_actions: p.num_actions,
                branch_prob: p.branch_prob,
                horizon,
                special_action_index: p.special_action_index,
                base_mean: p.base_mean,
                boost_factor: p.boost_factor,
                divergence: spec,
            })?;
            Ok(inst.model)
        }
    }
}

/// One `(algorithm, sigma, H)` combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub sigma: f64,
    #[serde(rename = "H")]
    pub horizon: usize,
}

impl Cell {
    pub fn name(&self, divergence: DivergenceKind) -> String {
        format!(
            "{}_{}_sigma{}_H{}",
            self.algorithm.name(),
            divergence.name(),
            self.sigma,
            self.horizon
        )
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for algorithm in self.algorithm.to_vec() {
            for sigma in self.sigma.to_vec() {
                for horizon in self.horizon.to_vec() {
                    cells.push(Cell {
                        algorithm,
                        sigma,
                        horizon,
                    });
                }
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.episodes == 0 {
            return bad("K must be >= 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        let cells = self.cells();
        if cells.is_empty() {
            return bad("algorithm, sigma and H must each list at least one value".into());
        }
        for cell in &cells {
            if !(cell.sigma >= 0.0 && cell.sigma.is_finite()) {
                return bad(format!(
                    "sigma must be a finite value >= 0, got {}",
                    cell.sigma
                ));
            }
            if cell.horizon == 0 {
                return bad("H must be >= 1".into());
            }
            if cell.algorithm == Algorithm::Rvi {
                if self.divergence == DivergenceKind::Tv {
                    return bad("rvi supports chi2 and KL balls, not TV".into());
                }
                if self.divergence == DivergenceKind::Kl && cell.sigma == 0.0 {
                    return bad("rvi with a KL ball needs sigma > 0".into());
                }
            }
            // Surface env_params mistakes before any run starts.
            let spec = DivergenceSpec::new(self.divergence, cell.sigma)?;
            build_environment(self.environment, &self.env_params, cell.horizon, spec)
                .map_err(|e| Error::Config(format!("environment: {e}")))?;
        }
        Ok(())
    }
}

/// Runs one seed of one cell end to end.
pub fn run_cell(
    config: &ExperimentConfig,
    cell: &Cell,
    seed: u64,
    exec: Exec,
) -> Result<RunRecord> {
    let spec = DivergenceSpec::new(config.divergence, cell.sigma)?;
    let env = build_environment(config.environment, &config.env_params, cell.horizon, spec)?;
    let mut agent = AgentConfig::with_preset(
        &env,
        config.episodes,
        config.delta,
        config.bonus_preset,
        seed,
    );
    agent.exec = exec;
    let run = match cell.algorithm {
        Algorithm::Rvi => rvi_run(&env, &agent, config.divergence)?,
        Algorithm::Ucbvi => ucbvi_run(&env, &agent)?,
    };
    let start = Instant::now();
    let mut record = compute_regret_with(&env, &run.policies, &agent.dual_cfg, exec, true)?;
    record.seed = seed;
    record.timings.planning = run.timings.planning;
    record.timings.execution = run.timings.execution;
    record.timings.evaluation = start.elapsed();
    record.config = serde_json::json!({
        "environment": config.environment,
        "env_params": config.env_params,
        "algorithm": cell.algorithm,
        "divergence": config.divergence,
        "sigma": cell.sigma,
        "H": cell.horizon,
        "K": config.episodes,
        "bonus_preset": config.bonus_preset,
        "delta": config.delta,
    });
    Ok(record)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedEntry {
    pub seed: u64,
    pub file: Option<String>,
    pub error: Option<String>,
    pub planning_secs: f64,
    pub execution_secs: f64,
    pub evaluation_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellEntry {
    pub name: String,
    #[serde(flatten)]
    pub cell: Cell,
    pub complete: bool,
    pub aggregate: Option<String>,
    pub seeds: Vec<SeedEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub complete: bool,
    pub cells: Vec<CellEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Runs the whole grid into `config.output_dir` and returns the manifest.
///
/// A failing seed does not stop the others; its cell is marked incomplete and
/// every finished run is still written.
pub fn run_experiment_config(config: &ExperimentConfig, exec: Exec) -> Result<Manifest> {
    config.validate()?;
    let cells = config.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| config.seeds.iter().map(move |&s| (c, s)))
        .collect();
    // Outer parallelism over jobs; each run plans sequentially.
    let results = map_slice(exec, &jobs, |&(c, seed)| {
        run_cell(config, &cells[c], seed, Exec::Sequential)
    });

    let root = &config.output_dir;
    fs::create_dir_all(root)?;
    let mut entries = Vec::with_capacity(cells.len());
    let mut results = results.into_iter();
    for cell in &cells {
        let name = cell.name(config.divergence);
        let dir = root.join(&name);
        fs::create_dir_all(&dir)?;
        let mut seeds = Vec::new();
        let mut records = Vec::new();
        for &seed in &config.seeds {
            let result = results.next().expect("one result per job");
            match result {
                Ok(record) => {
                    let file = format!("seed_{seed}.csv");
                    record.write_csv(fs::File::create(dir.join(&file))?)?;
                    seeds.push(SeedEntry {
                        seed,
                        file: Some(format!("{name}/{file}")),
                        error: None,
                        planning_secs: record.timings.planning.as_secs_f64(),
                        execution_secs: record.timings.execution.as_secs_f64(),
                        evaluation_secs: record.timings.evaluation.as_secs_f64(),
                    });
                    records.push(record);
                }
                Err(e) => seeds.push(SeedEntry {
                    seed,
                    file: None,
                    error: Some(e.to_string()),
                    planning_secs: 0.0,
                    execution_secs: 0.0,
                    evaluation_secs: 0.0,
                }),
            }
        }
        let aggregate_file = if records.is_empty() {
            None
        } else {
            let rows = aggregate(&records)?;
            write_aggregate_csv(&rows, fs::File::create(dir.join(AGGREGATE_FILE))?)?;
            Some(format!("{name}/{AGGREGATE_FILE}"))
        };
        entries.push(CellEntry {
            name,
            cell: *cell,
            complete: records.len() == config.seeds.len(),
            aggregate: aggregate_file,
            seeds,
        });
    }
    let manifest = Manifest {
        config: config.clone(),
        complete: entries.iter().all(|e| e.complete),
        cells: entries,
    };
    fs::write(
        root.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Loads a config file, runs it, and returns the run directory.
pub fn run_experiment(config_path: impl AsRef<Path>) -> Result<(PathBuf, Manifest)> {
    let config = ExperimentConfig::load(config_path)?;
    let manifest = run_experiment_config(&config, Exec::default())?;
    Ok((config.output_dir.clone(), manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "environment": "gambler",
            "env_params": {"target": 4},
            "algorithm": "rvi",
            "divergence": "chi2",
            "sigma": 0.3,
            "H": 4,
            "K": 5,
            "seeds": [1, 2],
            "output_dir": "out"
        })
    }

    #[test]
    fn scalar_or_list_fields() {
        let mut v = base();
        v["algorithm"] = serde_json::json!(["rvi", "ucbvi"]);
        v["sigma"] = serde_json::json!([0.1, 0.3]);
        let cfg = ExperimentConfig::from_json_str(&v.to_string()).unwrap();
        assert_eq!(cfg.cells().len(), 4);
        assert_eq!(cfg.bonus_preset, BonusPreset::Practical);
        assert_eq!(cfg.cells()[0].name(cfg.divergence), "rvi_chi2_sigma0.1_H4");
    }

    #[test]
    fn rejects_bad_configs() {
        for (field, value) in [
            ("seeds", serde_json::json!([])),
            ("seeds", serde_json::json!([3, 3])),
            ("K", serde_json::json!(0)),
            ("sigma", serde_json::json!(-0.1)),
            ("divergence", serde_json::json!("TV")),
            ("env_params", serde_json::json!({"target": 1})),
            ("env_params", serde_json::json!({"tagret": 4})),
            ("algorithm", serde_json::json!("dqn")),
        ] {
            let mut v = base();
            v[field] = value;
            assert!(
                ExperimentConfig::from_json_str(&v.to_string()).is_err(),
                "{field} accepted"
            );
        }
    }

    #[test]
    fn builds_each_environment() {
        let spec = DivergenceSpec::kl(0.1).unwrap();
        let lake = build_environment(
            EnvironmentName::FrozenLake,
            &serde_json::Value::Null,
            5,
            spec,
        )
        .unwrap();
        assert_eq!(lake.num_states(), 17);
        let hard = build_environment(
            EnvironmentName::HardInstance,
            &serde_json::json!({"num_actions": 3, "branch_prob": 0.5, "base_mean": 0.2}),
            4,
            spec,
        )
        .unwrap();
        assert_eq!(hard.num_states(), 3);
    }
}
