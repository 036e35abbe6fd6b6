//! Gambler's problem on a biased coin.
//!
//! Balances `0..=target` plus one absorbing sink at index `target + 1`.
//! Stake `a` is legal in balance `s` when `a <= min(s, target - s)`. Reaching
//! the target pays 1 on the following step and moves to the sink, so the
//! reward is collected once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DivergenceSpec, FiniteRmdp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamblerParams {
    pub target: usize,
    #[serde(default = "default_p_head")]
    pub p_head: f64,
    /// Starting balance; defaults to `target / 2`.
    #[serde(default)]
    pub initial_balance: Option<usize>,
}

fn default_p_head() -> f64 {
    0.6
}

impl GamblerParams {
    pub fn new(target: usize, p_head: f64) -> Self {
        Self {
            target,
            p_head,
            initial_balance: None,
        }
    }

    pub fn start(&self) -> usize {
        self.initial_balance.unwrap_or(self.target / 2)
    }
}

/// Gambler's problem with the default starting balance `target / 2`.
pub fn build_gambler(
    target: usize,
    horizon: usize,
    p_head: f64,
    spec: DivergenceSpec,
) -> Result<FiniteRmdp> {
    build_gambler_with(&GamblerParams::new(target, p_head), horizon, spec)
}

pub fn build_gambler_with(
    params: &GamblerParams,
    horizon: usize,
    spec: DivergenceSpec,
) -> Result<FiniteRmdp> {
    let target = params.target;
    let p = params.p_head;
    if target < 2 {
        return Err(Error::InvalidParameter(format!(
            "gambler target must be >= 2, got {target}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "p_head must lie in (0, 1), got {p}"
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let start = params.start();
    if start > target {
        return Err(Error::InvalidParameter(format!(
            "initial balance {start} exceeds target {target}"
        )));
    }
    let sink = target + 1;
    let ns = target + 2;
    let na = target / 2 + 1;

    let mut step_kernel = vec![0.0; ns * na * ns];
    let mut step_reward = vec![0.0; ns * na];
    let mut step_legal = vec![false; ns * na];
    let row = |s: usize, a: usize| (s * na + a) * ns;
    for s in 0..ns {
        if s == sink || s == 0 {
            step_legal[s * na] = true;
            step_kernel[row(s, 0) + s] = 1.0;
            continue;
        }
        if s == target {
            step_legal[s * na] = true;
            step_reward[s * na] = 1.0;
            step_kernel[row(s, 0) + sink] = 1.0;
            continue;
        }
        for a in 0..=s.min(target - s) {
            step_legal[s * na + a] = true;
            let base = row(s, a);
            if a == 0 {
                step_kernel[base + s] = 1.0;
            } else {
                step_kernel[base + s + a] += p;
                step_kernel[base + s - a] += 1.0 - p;
            }
        }
    }
    FiniteRmdp::new(
        ns,
        na,
        horizon,
        step_kernel.repeat(horizon),
        step_reward.repeat(horizon),
        step_legal.repeat(horizon),
        spec,
        start,
    )
}
