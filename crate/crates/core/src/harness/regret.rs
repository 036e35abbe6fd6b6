//! Robust regret of a sequence of played policies against exact ground truth.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::dp::{robust_policy_evaluation_with, robust_value_iteration_with};
use crate::dual::DualSolverConfig;
use crate::error::{Error, Result};
use crate::model::{DeterministicPolicy, FiniteRmdp};
use crate::par::Exec;

/// Gaps this far below zero are treated as rounding and clamped.
pub const NEGATIVE_GAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunTimings {
    pub planning: Duration,
    pub execution: Duration,
    pub evaluation: Duration,
}

/// Per-episode robust suboptimality gaps and their running sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub per_episode_gap: Vec<f64>,
    pub cumulative_regret: Vec<f64>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub timings: RunTimings,
}

impl RunRecord {
    pub fn from_gaps(gaps: Vec<f64>, seed: u64) -> Self {
        let cumulative_regret = gaps
            .iter()
            .scan(0.0, |acc, g| {
                *acc += g;
                Some(*acc)
            })
            .collect();
        Self {
            per_episode_gap: gaps,
            cumulative_regret,
            seed,
            config: serde_json::Value::Null,
            timings: RunTimings::default(),
        }
    }

    pub fn episodes(&self) -> usize {
        self.per_episode_gap.len()
    }

    pub fn total_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }

    /// Mean gap over episodes `from..to` (0-based, half open).
    pub fn mean_gap(&self, from: usize, to: usize) -> f64 {
        let slice = &self.per_episode_gap[from..to];
        slice.iter().sum::<f64>() / slice.len() as f64
    }

    /// `episode,gap,cumulative_regret,seed`, episodes numbered from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["episode", "gap", "cumulative_regret", "seed"])?;
        for (k, (g, c)) in self
            .per_episode_gap
            .iter()
            .zip(&self.cumulative_regret)
            .enumerate()
        {
            w.write_record([
                (k + 1).to_string(),
                g.to_string(),
                c.to_string(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads back what [`RunRecord::write_csv`] wrote. Config and timings are not stored.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if header != ["episode", "gap", "cumulative_regret", "seed"] {
            return Err(Error::MalformedCsv(format!(
                "unexpected header `{}`",
                header.join(",")
            )));
        }
        let mut gaps = Vec::new();
        let mut cumulative = Vec::new();
        let mut seed = 0;
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let bad = || Error::MalformedCsv(format!("row {}", i + 1));
            let episode: usize = row.get(0).and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            if episode != i + 1 {
                return Err(bad());
            }
            gaps.push(row.get(1).and_then(|x| x.parse().ok()).ok_or_else(bad)?);
            cumulative.push(row.get(2).and_then(|x| x.parse().ok()).ok_or_else(bad)?);
            seed = row.get(3).and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        }
        let mut record = Self::from_gaps(gaps, seed);
        record.cumulative_regret = cumulative;
        Ok(record)
    }
}

/// Exact robust gap `V*_1(s_1) - V^pi_1(s_1)` with per-policy memoization.
pub struct RegretEvaluator<'a> {
    model: &'a FiniteRmdp,
    cfg: DualSolverConfig,
    exec: Exec,
    optimal_value: f64,
    memo: Option<HashMap<DeterministicPolicy, f64>>,
}

impl<'a> RegretEvaluator<'a> {
    pub fn new(
        model: &'a FiniteRmdp,
        cfg: &DualSolverConfig,
        exec: Exec,
        memoize: bool,
    ) -> Result<Self> {
        let optimal = robust_value_iteration_with(model, cfg, exec)?;
        Ok(Self {
            model,
            cfg: *cfg,
            exec,
            optimal_value: optimal.values.get(0, model.initial_state()),
            memo: memoize.then(HashMap::new),
        })
    }

    pub fn optimal_value(&self) -> f64 {
        self.optimal_value
    }

    pub fn policy_value(&mut self, policy: &DeterministicPolicy) -> Result<f64> {
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(policy)) {
            return Ok(*v);
        }
        let values = robust_policy_evaluation_with(self.model, policy, &self.cfg, self.exec)?;
        let v = values.get(0, self.model.initial_state());
        if let Some(memo) = self.memo.as_mut() {
            memo.insert(policy.clone(), v);
        }
        Ok(v)
    }

    /// Gap of `policy`, clamped at zero within [`NEGATIVE_GAP_TOLERANCE`].
    pub fn gap(&mut self, episode: usize, policy: &DeterministicPolicy) -> Result<f64> {
        let gap = self.optimal_value - self.policy_value(policy)?;
        if gap < -NEGATIVE_GAP_TOLERANCE {
            return Err(Error::NegativeGap { episode, gap });
        }
        Ok(gap.max(0.0))
    }

    pub fn distinct_policies(&self) -> Option<usize> {
        self.memo.as_ref().map(HashMap::len)
    }
}

pub fn compute_regret(
    env: &FiniteRmdp,
    policies: &[DeterministicPolicy],
    cfg: &DualSolverConfig,
) -> Result<RunRecord> {
    compute_regret_with(env, policies, cfg, Exec::default(), true)
}

pub fn compute_regret_with(
    env: &FiniteRmdp,
    policies: &[DeterministicPolicy],
    cfg: &DualSolverConfig,
    exec: Exec,
    memoize: bool,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut eval = RegretEvaluator::new(env, cfg, exec, memoize)?;
    let gaps = policies
        .iter()
        .enumerate()
        .map(|(k, p)| eval.gap(k + 1, p))
        .collect::<Result<Vec<_>>>()?;
    let mut record = RunRecord::from_gaps(gaps, 0);
    record.timings.evaluation = start.elapsed();
    Ok(record)
}

/// `(K', eps(K'))` with `eps(K') = (1/K') sum_{k <= K'} gap_k` on a log-spaced grid.
///
/// `eps(K')` is the expected suboptimality of a policy drawn uniformly from the
/// first `K'` played ones.
pub fn sample_complexity_curve(record: &RunRecord) -> Vec<(usize, f64)> {
    log_grid(record.episodes(), 50)
        .into_iter()
        .map(|k| (k, record.cumulative_regret[k - 1] / k as f64))
        .collect()
}

/// Up to `points` distinct integers from 1 to `n`, evenly spaced in log scale,
/// always including both ends.
pub fn log_grid(n: usize, points: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let points = points.max(2);
    let top = (n as f64).ln();
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (top * i as f64 / (points - 1) as f64).exp().round() as usize)
        .map(|k| k.clamp(1, n))
        .collect();
    grid.push(n);
    grid.dedup();
    grid
}
