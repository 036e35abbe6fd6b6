//! Non-robust UCB-VI with a Hoeffding bonus `c H sqrt(L / max(N, 1))`.

use crate::agent::{empirical_kernel, log_factor, online_loop, AgentConfig, OnlineRun};
use crate::dp::argmax_legal;
use crate::error::Result;
use crate::model::{DeterministicPolicy, FiniteRmdp, ValueTable, VisitCounts};
use crate::par::map_range;

/// Optimistic nominal planning; the uncertainty ball of `env` is ignored.
pub fn ucbvi_plan(
    env: &FiniteRmdp,
    counts: &VisitCounts,
    cfg: &AgentConfig,
) -> (DeterministicPolicy, ValueTable) {
    let (hn, ns, na) = (env.horizon(), env.num_states(), env.num_actions());
    let kernel = empirical_kernel(counts);
    let l = log_factor(ns, na, hn, cfg.total_episodes, cfg.failure_prob);
    let scale = cfg.bonus_scale_hoeffding * hn as f64 * l.sqrt();
    let mut upper = ValueTable::zeros(hn, ns);
    let mut policy = DeterministicPolicy::first_legal(env);
    for h in (0..hn).rev() {
        let cap = (hn - h) as f64;
        let next = upper.step(h + 1).to_vec();
        let rows: Vec<Vec<f64>> = map_range(cfg.exec, ns, |s| {
            (0..na)
                .map(|a| {
                    if !env.is_legal(h, s, a) {
                        return 0.0;
                    }
                    if !kernel.is_visited(h, s, a) {
                        return cap;
                    }
                    let n = counts.pair(h, s, a) as f64;
                    let mean: f64 = kernel
                        .row(h, s, a)
                        .iter()
                        .zip(&next)
                        .map(|(p, v)| p * v)
                        .sum();
                    (env.reward(h, s, a) + mean + scale / n.sqrt()).min(cap)
                })
                .collect()
        });
        for (s, q) in rows.iter().enumerate() {
            let (a, v) = argmax_legal(q, |a| env.is_legal(h, s, a)).expect("validated model");
            policy.set_action(h, s, a);
            upper.set(h, s, v);
        }
    }
    (policy, upper)
}

pub fn ucbvi_run(env: &FiniteRmdp, cfg: &AgentConfig) -> Result<OnlineRun> {
    cfg.validate()?;
    online_loop(env, cfg.total_episodes, cfg.rng_seed, |_, counts| {
        Ok(ucbvi_plan(env, counts, cfg).0)
    })
}
