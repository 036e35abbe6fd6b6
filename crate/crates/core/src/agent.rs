//! The RVI-f agent: optimistic robust value iteration on an empirical model.
//!
//! Each episode rebuilds `P_hat` from visit counts, runs a backward pass that
//! keeps an upper and a lower robust Q estimate (`Q_up`, `Q_lo`) separated by
//! a divergence-specific bonus, plays the policy greedy in `Q_up`, and records
//! the trajectory.
//!
//! Pairs never visited are treated as maximally uncertain: `Q_up` is the
//! remaining horizon and `Q_lo` is zero, without consulting the dual on an
//! empty row.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dp::argmax_legal;
use crate::dual::{robust_expectation, DualSolverConfig};
use crate::error::{Error, Result};
use crate::model::{
    DeterministicPolicy, DivergenceKind, EpisodeTrajectory, FiniteRmdp, QTable, Transition,
    ValueTable, VisitCounts,
};
use crate::par::{map_range, Exec};

/// Which constants the bonuses use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonusPreset {
    /// `c1 = c2 = cf = 1` in the bonus formulas as written.
    Theory,
    /// Keeps the variance term at theory scale and drops the `c2` and `cf`
    /// terms, whose worst-case constants dwarf the value range at desk scale;
    /// the UCB-VI Hoeffding bonus shrinks to `0.1 / sqrt(N)`.
    #[default]
    Practical,
}

/// Constants of a bonus preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusScales {
    pub c1: f64,
    pub c2: f64,
    pub cf: f64,
    /// UCB-VI Hoeffding scale `c` in `c H sqrt(L / N)`.
    pub hoeffding: f64,
}

impl BonusPreset {
    pub fn scales(self, horizon: usize, log_factor: f64) -> BonusScales {
        match self {
            BonusPreset::Theory => BonusScales {
                c1: 1.0,
                c2: 1.0,
                cf: 1.0,
                hoeffding: 1.0,
            },
            BonusPreset::Practical => BonusScales {
                c1: PRACTICAL_C1,
                c2: 0.0,
                cf: 0.0,
                // Leaves c' sqrt(1 / N) of the Hoeffding bonus.
                hoeffding: PRACTICAL_HOEFFDING / (horizon as f64 * log_factor.sqrt()),
            },
        }
    }
}

pub const PRACTICAL_C1: f64 = 1.0;
pub const PRACTICAL_HOEFFDING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    pub total_episodes: usize,
    pub failure_prob: f64,
    pub bonus_scale_c1: f64,
    pub bonus_scale_c2: f64,
    pub bonus_scale_cf: f64,
    /// Only used by the UCB-VI baseline.
    pub bonus_scale_hoeffding: f64,
    pub dual_cfg: DualSolverConfig,
    pub rng_seed: u64,
    pub exec: Exec,
}

impl AgentConfig {
    /// Config whose bonus constants come from `preset` for `model`.
    pub fn with_preset(
        model: &FiniteRmdp,
        total_episodes: usize,
        failure_prob: f64,
        preset: BonusPreset,
        rng_seed: u64,
    ) -> Self {
        let l = log_factor(
            model.num_states(),
            model.num_actions(),
            model.horizon(),
            total_episodes.max(1),
            failure_prob,
        );
        let scales = preset.scales(model.horizon(), l);
        Self {
            total_episodes,
            failure_prob,
            bonus_scale_c1: scales.c1,
            bonus_scale_c2: scales.c2,
            bonus_scale_cf: scales.cf,
            bonus_scale_hoeffding: scales.hoeffding,
            dual_cfg: DualSolverConfig::default(),
            rng_seed,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_episodes == 0 {
            return Err(Error::InvalidParameter("K must be >= 1".into()));
        }
        if !(self.failure_prob > 0.0 && self.failure_prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.failure_prob
            )));
        }
        for (name, c) in [
            ("c1", self.bonus_scale_c1),
            ("c2", self.bonus_scale_c2),
            ("cf", self.bonus_scale_cf),
            ("hoeffding", self.bonus_scale_hoeffding),
        ] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {c}"
                )));
            }
        }
        self.dual_cfg.validate()
    }
}

/// `L = log(S^3 A H^2 K^{3/2} / delta)`.
pub fn log_factor(
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    episodes: usize,
    delta: f64,
) -> f64 {
    let (s, a, h, k) = (
        num_states as f64,
        num_actions as f64,
        horizon as f64,
        episodes as f64,
    );
    3.0 * s.ln() + a.ln() + 2.0 * h.ln() + 1.5 * k.ln() - delta.ln()
}

/// `P_hat[h][s][a][s'] = N(s,a,s') / max(N(s,a), 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalKernel {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
    visited: Vec<bool>,
}

impl EmpiricalKernel {
    #[inline]
    fn pair_index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * self.num_actions + a
    }

    /// The estimated row; all zeros when the pair was never visited.
    #[inline]
    pub fn row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = self.pair_index(h, s, a) * self.num_states;
        &self.probs[start..start + self.num_states]
    }

    #[inline]
    pub fn is_visited(&self, h: usize, s: usize, a: usize) -> bool {
        self.visited[self.pair_index(h, s, a)]
    }
}

pub fn empirical_kernel(counts: &VisitCounts) -> EmpiricalKernel {
    let (hn, ns, na) = (counts.horizon(), counts.num_states(), counts.num_actions());
    let mut probs = vec![0.0; hn * ns * na * ns];
    let mut visited = vec![false; hn * ns * na];
    for h in 0..hn {
        for s in 0..ns {
            for a in 0..na {
                let n = counts.pair(h, s, a);
                let pair = (h * ns + s) * na + a;
                visited[pair] = n > 0;
                let denom = n.max(1) as f64;
                let row = &mut probs[pair * ns..(pair + 1) * ns];
                for (p, &c) in row.iter_mut().zip(counts.triple_row(h, s, a)) {
                    *p = c as f64 / denom;
                }
            }
        }
    }
    EmpiricalKernel {
        num_states: ns,
        num_actions: na,
        probs,
        visited,
    }
}

/// Quantities shared by every bonus evaluation in one planning pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusContext {
    pub sigma: f64,
    pub log_factor: f64,
    pub horizon: usize,
    pub num_states: usize,
    pub episodes: usize,
    pub c1: f64,
    pub c2: f64,
    pub cf: f64,
}

impl BonusContext {
    pub fn new(model: &FiniteRmdp, cfg: &AgentConfig) -> Self {
        Self {
            sigma: model.uncertainty().radius,
            log_factor: log_factor(
                model.num_states(),
                model.num_actions(),
                model.horizon(),
                cfg.total_episodes,
                cfg.failure_prob,
            ),
            horizon: model.horizon(),
            num_states: model.num_states(),
            episodes: cfg.total_episodes,
            c1: cfg.bonus_scale_c1,
            c2: cfg.bonus_scale_c2,
            cf: cfg.bonus_scale_cf,
        }
    }
}

/// Chi-square bonus for a pair visited `visits` times with estimated row `p_hat`.
pub fn bonus_chi2(
    ctx: &BonusContext,
    visits: u64,
    p_hat: &[f64],
    upper_next: &[f64],
    lower_next: &[f64],
) -> f64 {
    let n = visits.max(1) as f64;
    let sigma = ctx.sigma;
    if sigma == 0.0 {
        return 0.0;
    }
    let mid = |i: usize| 0.5 * (upper_next[i] + lower_next[i]);
    let mut mean = 0.0;
    let mut gap = 0.0;
    for (i, &p) in p_hat.iter().enumerate() {
        mean += p * mid(i);
        gap += p * (upper_next[i] - lower_next[i]);
    }
    let var: f64 = p_hat
        .iter()
        .enumerate()
        .map(|(i, &p)| p * (mid(i) - mean).powi(2))
        .sum::<f64>()
        .max(0.0);
    let h = ctx.horizon as f64;
    let l = ctx.log_factor;
    (sigma * ctx.c1 * l * var / n).sqrt()
        + 2.0 * sigma.sqrt() * gap / h
        + ctx.c2 * sigma.sqrt() * h * h * ctx.num_states as f64 * (2.0 * l + 1.0) / n.sqrt()
        + (sigma / ctx.episodes as f64).sqrt()
}

/// KL bonus; the smallest positive entry of `p_hat` scales the estimation error.
pub fn bonus_kl(ctx: &BonusContext, visits: u64, p_hat: &[f64]) -> Result<f64> {
    if ctx.sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "the KL bonus needs a positive radius".into(),
        ));
    }
    let n = visits.max(1) as f64;
    let p_min = p_hat
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let p_min = if p_min.is_finite() { p_min } else { 1.0 };
    let h = ctx.horizon as f64;
    Ok(
        2.0 * ctx.cf * h / ctx.sigma * (ctx.log_factor / (n * p_min)).sqrt()
            + (1.0 / ctx.episodes as f64).sqrt(),
    )
}

/// Upper and lower robust estimates plus the greedy policy of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceState {
    pub upper_q: QTable,
    pub lower_q: QTable,
    pub upper_v: ValueTable,
    pub lower_v: ValueTable,
    pub policy: DeterministicPolicy,
}

/// One backward pass of optimistic robust planning on `kernel`.
pub fn optimistic_planning(
    kernel: &EmpiricalKernel,
    counts: &VisitCounts,
    cfg: &AgentConfig,
    model: &FiniteRmdp,
    kind: DivergenceKind,
) -> Result<ConfidenceState> {
    if kind == DivergenceKind::Tv {
        return Err(Error::InvalidParameter(
            "optimistic planning supports chi2 and KL balls".into(),
        ));
    }
    if kind == DivergenceKind::Kl && model.uncertainty().radius <= 0.0 {
        return Err(Error::InvalidParameter(
            "KL planning needs a positive radius".into(),
        ));
    }
    let spec = crate::model::DivergenceSpec {
        kind,
        radius: model.uncertainty().radius,
    };
    let ctx = BonusContext::new(model, cfg);
    let (hn, ns, na) = (model.horizon(), model.num_states(), model.num_actions());
    let mut upper_q = QTable::zeros(hn, ns, na);
    let mut lower_q = QTable::zeros(hn, ns, na);
    let mut upper_v = ValueTable::zeros(hn, ns);
    let mut lower_v = ValueTable::zeros(hn, ns);
    let mut policy = DeterministicPolicy::first_legal(model);

    for h in (0..hn).rev() {
        let cap = (hn - h) as f64;
        let up_next = upper_v.step(h + 1).to_vec();
        let lo_next = lower_v.step(h + 1).to_vec();
        let per_state: Vec<Result<(Vec<f64>, Vec<f64>)>> = map_range(cfg.exec, ns, |s| {
            let mut up = vec![0.0; na];
            let mut lo = vec![0.0; na];
            for a in 0..na {
                if !model.is_legal(h, s, a) {
                    continue;
                }
                if !kernel.is_visited(h, s, a) {
                    up[a] = cap;
                    continue;
                }
                let row = kernel.row(h, s, a);
                let n = counts.pair(h, s, a);
                let bonus = match kind {
                    DivergenceKind::Chi2 => bonus_chi2(&ctx, n, row, &up_next, &lo_next),
                    _ => bonus_kl(&ctx, n, row)?,
                };
                let r = model.reward(h, s, a);
                // The robust expectation lies between the min and max of V over
                // the row's support, which settles clipped and flat cases without the dual.
                let (up_min, up_max) = support_range(row, &up_next);
                up[a] = if r + up_min + bonus >= cap {
                    cap
                } else if up_min == up_max {
                    r + up_min + bonus
                } else {
                    (r + robust_expectation(row, &up_next, &spec, &cfg.dual_cfg)? + bonus).min(cap)
                };
                let (lo_min, lo_max) = support_range(row, &lo_next);
                lo[a] = if r + lo_max - bonus <= 0.0 {
                    0.0
                } else if lo_min == lo_max {
                    r + lo_min - bonus
                } else {
                    (r + robust_expectation(row, &lo_next, &spec, &cfg.dual_cfg)? - bonus).max(0.0)
                };
            }
            Ok((up, lo))
        });
        for (s, entry) in per_state.into_iter().enumerate() {
            let (up, lo) = entry?;
            let (best_a, best_up) =
                argmax_legal(&up, |a| model.is_legal(h, s, a)).expect("validated model");
            let (_, best_lo) =
                argmax_legal(&lo, |a| model.is_legal(h, s, a)).expect("validated model");
            for a in 0..na {
                upper_q.set(h, s, a, up[a]);
                lower_q.set(h, s, a, lo[a]);
            }
            policy.set_action(h, s, best_a);
            upper_v.set(h, s, best_up);
            lower_v.set(h, s, best_lo);
        }
    }
    Ok(ConfidenceState {
        upper_q,
        lower_q,
        upper_v,
        lower_v,
        policy,
    })
}

fn support_range(row: &[f64], values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&p, &v) in row.iter().zip(values) {
        if p > 0.0 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// Draws an index from `row` with one uniform variate.
pub(crate) fn sample_index<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Plays `policy` for one episode of exactly `H` steps on the nominal kernel.
pub fn run_episode<R: Rng + ?Sized>(
    env: &FiniteRmdp,
    policy: &DeterministicPolicy,
    rng: &mut R,
) -> EpisodeTrajectory {
    let mut state = env.initial_state();
    let mut steps = Vec::with_capacity(env.horizon());
    for h in 0..env.horizon() {
        let action = policy.action(h, state);
        let next_state = sample_index(env.row(h, state, action), rng);
        steps.push(Transition {
            step: h,
            state,
            action,
            reward: env.reward(h, state, action),
            next_state,
        });
        state = next_state;
    }
    EpisodeTrajectory { steps }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub planning: Duration,
    pub execution: Duration,
}

/// Output of an online run: the policy played in every episode.
#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub policies: Vec<DeterministicPolicy>,
    pub counts: VisitCounts,
    pub timings: PhaseTimings,
}

/// Shared online loop: plan from counts, play, record.
pub(crate) fn online_loop<P>(
    env: &FiniteRmdp,
    episodes: usize,
    seed: u64,
    mut plan: P,
) -> Result<OnlineRun>
where
    P: FnMut(usize, &VisitCounts) -> Result<DeterministicPolicy>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = VisitCounts::for_model(env);
    let mut policies = Vec::with_capacity(episodes);
    let mut timings = PhaseTimings::default();
    for k in 0..episodes {
        let t0 = Instant::now();
        let policy = plan(k, &counts)?;
        let t1 = Instant::now();
        let traj = run_episode(env, &policy, &mut rng);
        counts.record_trajectory(&traj);
        timings.planning += t1 - t0;
        timings.execution += t1.elapsed();
        policies.push(policy);
    }
    Ok(OnlineRun {
        policies,
        counts,
        timings,
    })
}

/// Runs RVI-f for `cfg.total_episodes` episodes.
pub fn rvi_run(env: &FiniteRmdp, cfg: &AgentConfig, kind: DivergenceKind) -> Result<OnlineRun> {
    rvi_run_observed(env, cfg, kind, |_, _| {})
}

/// Like [`rvi_run`], handing every episode's confidence state to `observe`.
pub fn rvi_run_observed<O>(
    env: &FiniteRmdp,
    cfg: &AgentConfig,
    kind: DivergenceKind,
    mut observe: O,
) -> Result<OnlineRun>
where
    O: FnMut(usize, &ConfidenceState),
{
    cfg.validate()?;
    if env.uncertainty().kind != kind {
        return Err(Error::InvalidParameter(format!(
            "environment uses a {} ball but the agent was asked for {kind}",
            env.uncertainty().kind
        )));
    }
    online_loop(env, cfg.total_episodes, cfg.rng_seed, |k, counts| {
        let kernel = empirical_kernel(counts);
        let state = optimistic_planning(&kernel, counts, cfg, env, kind)?;
        observe(k, &state);
        Ok(state.policy)
    })
}

/// Uniformly random pick among the played policies.
pub fn output_policy<'a, R: Rng + ?Sized>(
    policies: &'a [DeterministicPolicy],
    rng: &mut R,
) -> Result<&'a DeterministicPolicy> {
    if policies.is_empty() {
        return Err(Error::NoPolicies);
    }
    Ok(&policies[rng.random_range(0..policies.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::value_iteration;
    use crate::envs::build_gambler;
    use crate::model::DivergenceSpec;
    use approx::assert_abs_diff_eq;

    fn ctx(sigma: f64, h: usize, s: usize, k: usize, c: f64) -> BonusContext {
        BonusContext {
            sigma,
            log_factor: log_factor(s, 2, h, k, 0.1),
            horizon: h,
            num_states: s,
            episodes: k,
            c1: c,
            c2: c,
            cf: c,
        }
    }

    #[test]
    fn empirical_rows() {
        let mut counts = VisitCounts::new(1, 3, 2);
        for _ in 0..3 {
            counts.record(0, 0, 0, 1);
        }
        counts.record(0, 0, 0, 2);
        counts.record(0, 1, 1, 2);
        let k = empirical_kernel(&counts);
        assert_eq!(k.row(0, 0, 0), &[0.0, 0.75, 0.25]);
        assert_eq!(k.row(0, 1, 1), &[0.0, 0.0, 1.0]);
        assert_eq!(k.row(0, 2, 0), &[0.0; 3]);
        assert!(!k.is_visited(0, 2, 0));
        assert!(k.is_visited(0, 1, 1));
    }

    #[test]
    fn log_factor_examples() {
        assert_abs_diff_eq!(log_factor(1, 1, 1, 1, (-1f64).exp()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(log_factor(2, 2, 2, 4, 0.1), 5120f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(log_factor(2, 2, 2, 4, 0.1), 8.5410, epsilon = 1e-4);
        assert!(log_factor(2, 2, 2, 5, 0.1) > log_factor(2, 2, 2, 4, 0.1));
    }

    #[test]
    fn chi2_bonus_hand_example() {
        let c = ctx(0.25, 2, 2, 4, 1.0);
        let b = bonus_chi2(&c, 4, &[0.5, 0.5], &[1.0, 0.0], &[1.0, 0.0]);
        let l = 5120f64.ln();
        let by_hand =
            (0.25 * l * 0.25 / 4.0).sqrt() + 0.5 * 4.0 * 2.0 * (2.0 * l + 1.0) / 2.0 + 0.25;
        // Second substitution: sqrt(sigma) = 1/2, Var = 1/4, N = 4.
        let regrouped = 0.125 * l.sqrt() + 2.0 * (2.0 * l + 1.0) + 0.5 * 0.5;
        assert_abs_diff_eq!(by_hand, regrouped, epsilon = 1e-12);
        assert_abs_diff_eq!(b, by_hand, epsilon = 1e-12);
    }

    #[test]
    fn chi2_bonus_special_cases() {
        let c = ctx(0.0, 3, 2, 10, 1.0);
        assert_eq!(
            bonus_chi2(&c, 3, &[0.5, 0.5], &[2.0, 0.0], &[0.0, 0.0]),
            0.0
        );
        let c = ctx(0.3, 3, 2, 10, 1.0);
        let flat = bonus_chi2(&c, 9, &[0.5, 0.5], &[1.5, 1.5], &[1.5, 1.5]);
        let expected =
            0.3f64.sqrt() * 9.0 * 2.0 * (2.0 * c.log_factor + 1.0) / 3.0 + (0.3f64 / 10.0).sqrt();
        assert_abs_diff_eq!(flat, expected, epsilon = 1e-12);
    }

    #[test]
    fn kl_bonus_examples() {
        let c = ctx(0.5, 2, 2, 4, 1.0);
        let l = 5120f64.ln();
        let b = bonus_kl(&c, 4, &[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(b, 8.0 * (l / (4.0 * 0.25)).sqrt() + 0.5, epsilon = 1e-12);
        let point = bonus_kl(&c, 4, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            point,
            2.0 * 2.0 * l.sqrt() / (0.5 * 2.0) + 0.5,
            epsilon = 1e-12
        );
        let half = bonus_kl(&c, 4, &[0.875, 0.125]).unwrap();
        assert_abs_diff_eq!(half - 0.5, (b - 0.5) * 2f64.sqrt(), epsilon = 1e-12);
        assert!(bonus_kl(&ctx(0.0, 2, 2, 4, 1.0), 4, &[1.0, 0.0]).is_err());
    }

    fn gambler(sigma: f64) -> FiniteRmdp {
        build_gambler(6, 5, 0.6, DivergenceSpec::chi2(sigma).unwrap()).unwrap()
    }

    #[test]
    fn first_episode_plays_the_lowest_action() {
        let env = gambler(0.3);
        let cfg = AgentConfig::with_preset(&env, 1, 0.1, BonusPreset::Theory, 0);
        let run = rvi_run(&env, &cfg, DivergenceKind::Chi2).unwrap();
        assert_eq!(run.policies.len(), 1);
        assert_eq!(run.policies[0], DeterministicPolicy::first_legal(&env));
        assert!(run.policies[0].actions().iter().all(|&a| a == 0));
    }

    #[test]
    fn envelope_is_ordered_and_clipped() {
        let env = gambler(0.3);
        let cfg = AgentConfig::with_preset(&env, 60, 0.1, BonusPreset::Practical, 4);
        let hn = env.horizon() as f64;
        let mut checked = 0;
        let run = rvi_run_observed(&env, &cfg, DivergenceKind::Chi2, |_, st| {
            for (up, lo) in st.upper_q.as_slice().iter().zip(st.lower_q.as_slice()) {
                assert!(lo <= up && *lo >= 0.0 && *up <= hn);
                checked += 1;
            }
            for (up, lo) in st.upper_v.as_slice().iter().zip(st.lower_v.as_slice()) {
                assert!(lo <= up);
            }
        })
        .unwrap();
        assert!(checked > 0);
        assert_eq!(run.counts.total(), 60 * env.horizon() as u64);
        assert!(run.counts.is_consistent());
    }

    #[test]
    fn zero_radius_with_exact_counts_brackets_nominal_q() {
        let env = gambler(0.0);
        let mut counts = VisitCounts::for_model(&env);
        for h in 0..env.horizon() {
            for s in 0..env.num_states() {
                for a in env.legal_actions(h, s).collect::<Vec<_>>() {
                    for (next, &p) in env.row(h, s, a).iter().enumerate() {
                        for _ in 0..(p * 1000.0).round() as usize {
                            counts.record(h, s, a, next);
                        }
                    }
                }
            }
        }
        let cfg = AgentConfig::with_preset(&env, 100, 0.1, BonusPreset::Theory, 0);
        let st = optimistic_planning(
            &empirical_kernel(&counts),
            &counts,
            &cfg,
            &env,
            DivergenceKind::Chi2,
        )
        .unwrap();
        let exact = value_iteration(&env);
        for h in 0..env.horizon() {
            for s in 0..env.num_states() {
                assert_abs_diff_eq!(st.upper_v.get(h, s), exact.values.get(h, s), epsilon = 1e-9);
                assert_abs_diff_eq!(st.lower_v.get(h, s), exact.values.get(h, s), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tv_and_mismatched_kinds_are_rejected() {
        let env = gambler(0.3);
        let cfg = AgentConfig::with_preset(&env, 3, 0.1, BonusPreset::Practical, 0);
        assert!(rvi_run(&env, &cfg, DivergenceKind::Kl).is_err());
        let tv = env.with_uncertainty(DivergenceSpec::tv(0.3).unwrap());
        assert!(rvi_run(&tv, &cfg, DivergenceKind::Tv).is_err());
        let mut bad = cfg;
        bad.failure_prob = 1.0;
        assert!(rvi_run(&env, &bad, DivergenceKind::Chi2).is_err());
    }

    #[test]
    fn episodes_are_reproducible_and_chained() {
        let env = gambler(0.3);
        let policy = DeterministicPolicy::first_legal(&env);
        let mut bold = policy.clone();
        for h in 0..env.horizon() {
            for s in 1..6 {
                bold.set_action(h, s, s.min(6 - s));
            }
        }
        let a = run_episode(&env, &bold, &mut ChaCha8Rng::seed_from_u64(9));
        let b = run_episode(&env, &bold, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), env.horizon());
        assert!(a.is_chained());
    }

    #[test]
    fn sampled_successors_follow_the_kernel() {
        // From balance 3 staking 2 of a 6 target: 5 w.p. 0.6, 1 w.p. 0.4.
        let mut policy = DeterministicPolicy::first_legal(&gambler(0.3));
        policy.set_action(0, 3, 2);
        let env = gambler(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let wins = (0..n)
            .filter(|_| run_episode(&env, &policy, &mut rng).steps[0].next_state == 5)
            .count();
        let sd = (0.6 * 0.4 / n as f64).sqrt();
        assert!((wins as f64 / n as f64 - 0.6).abs() < 3.0 * sd);
    }

    #[test]
    fn output_policy_is_uniform() {
        let env = gambler(0.3);
        let mut policies = Vec::new();
        for a in 0..4 {
            let mut p = DeterministicPolicy::first_legal(&env);
            p.set_action(0, 3, a);
            policies.push(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut hits = [0usize; 4];
        for _ in 0..10_000 {
            let p = output_policy(&policies, &mut rng).unwrap();
            hits[p.action(0, 3)] += 1;
        }
        assert!(hits.iter().all(|&h| (h as f64 / 1e4 - 0.25).abs() <= 0.02));
        assert_eq!(
            output_policy(&policies[..1], &mut rng).unwrap(),
            &policies[0]
        );
        assert!(output_policy(&[], &mut rng).is_err());
    }
}
