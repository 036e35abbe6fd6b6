//! Finite-horizon robust MDPs and the tables that live on them.
//!
//! Steps are stored 0-based: step `h = 1` of an episode is index `0`, and value
//! tables carry one extra terminal row at index `H` that is identically zero.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance for nominal transition rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivergenceKind {
    #[serde(rename = "TV", alias = "tv")]
    Tv,
    #[serde(rename = "Chi2", alias = "chi2", alias = "CHI2")]
    Chi2,
    #[serde(rename = "KL", alias = "kl")]
    Kl,
}

impl DivergenceKind {
    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::Tv => "tv",
            DivergenceKind::Chi2 => "chi2",
            DivergenceKind::Kl => "kl",
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tv" => Ok(DivergenceKind::Tv),
            "chi2" | "chi-squared" | "chisq" => Ok(DivergenceKind::Chi2),
            "kl" => Ok(DivergenceKind::Kl),
            other => Err(Error::InvalidParameter(format!(
                "unknown divergence `{other}` (expected tv, chi2 or kl)"
            ))),
        }
    }
}

/// The f-divergence ball `{P : D_f(P || P*) <= sigma}` around each nominal row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSpec {
    pub kind: DivergenceKind,
    #[serde(rename = "sigma")]
    pub radius: f64,
}

impl DivergenceSpec {
    pub fn new(kind: DivergenceKind, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "divergence radius must be finite and >= 0, got {radius}"
            )));
        }
        Ok(Self { kind, radius })
    }

    pub fn chi2(radius: f64) -> Result<Self> {
        Self::new(DivergenceKind::Chi2, radius)
    }

    pub fn kl(radius: f64) -> Result<Self> {
        Self::new(DivergenceKind::Kl, radius)
    }

    pub fn tv(radius: f64) -> Result<Self> {
        Self::new(DivergenceKind::Tv, radius)
    }
}

/// A finite-horizon (s,a)-rectangular robust MDP with deterministic rewards.
///
/// All tensors are dense and indexed `[h][s][a]` (and `[s']` for the kernel).
/// Illegal actions carry all-zero kernel rows and are skipped by every max.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRmdp {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    kernel: Vec<f64>,
    reward: Vec<f64>,
    legal: Vec<bool>,
    uncertainty: DivergenceSpec,
    initial_state: usize,
}

impl FiniteRmdp {
    /// Builds a model and rejects it unless [`validate_rmdp`] reports no violation.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        kernel: Vec<f64>,
        reward: Vec<f64>,
        legal: Vec<bool>,
        uncertainty: DivergenceSpec,
        initial_state: usize,
    ) -> Result<Self> {
        let model = Self::from_raw(
            num_states,
            num_actions,
            horizon,
            kernel,
            reward,
            legal,
            uncertainty,
            initial_state,
        )?;
        let report = validate_rmdp(&model);
        if report.is_ok() {
            Ok(model)
        } else {
            Err(Error::InvalidModel(report.violations))
        }
    }

    /// Builds a model checking tensor shapes only; use [`validate_rmdp`] for the rest.
    #[allow(clippy::too_many_arguments)]
    pub fn from_raw(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        kernel: Vec<f64>,
        reward: Vec<f64>,
        legal: Vec<bool>,
        uncertainty: DivergenceSpec,
        initial_state: usize,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::InvalidParameter(
                "S, A and H must all be positive".into(),
            ));
        }
        let pairs = horizon * num_states * num_actions;
        if kernel.len() != pairs * num_states {
            return Err(Error::LengthMismatch {
                left: kernel.len(),
                right: pairs * num_states,
            });
        }
        if reward.len() != pairs {
            return Err(Error::LengthMismatch {
                left: reward.len(),
                right: pairs,
            });
        }
        if legal.len() != pairs {
            return Err(Error::LengthMismatch {
                left: legal.len(),
                right: pairs,
            });
        }
        if initial_state >= num_states {
            return Err(Error::InvalidParameter(format!(
                "initial state {initial_state} out of range for S={num_states}"
            )));
        }
        Ok(Self {
            num_states,
            num_actions,
            horizon,
            kernel,
            reward,
            legal,
            uncertainty,
            initial_state,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn uncertainty(&self) -> DivergenceSpec {
        self.uncertainty
    }

    /// Same dynamics and rewards under a different uncertainty ball.
    pub fn with_uncertainty(&self, uncertainty: DivergenceSpec) -> Self {
        Self {
            uncertainty,
            ..self.clone()
        }
    }

    #[inline]
    fn pair_index(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!(h < self.horizon && s < self.num_states && a < self.num_actions);
        (h * self.num_states + s) * self.num_actions + a
    }

    /// Nominal next-state distribution `P*_h(. | s, a)`.
    #[inline]
    pub fn row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let start = self.pair_index(h, s, a) * self.num_states;
        &self.kernel[start..start + self.num_states]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.reward[self.pair_index(h, s, a)]
    }

    #[inline]
    pub fn is_legal(&self, h: usize, s: usize, a: usize) -> bool {
        self.legal[self.pair_index(h, s, a)]
    }

    pub fn legal_actions(&self, h: usize, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_actions).filter(move |&a| self.is_legal(h, s, a))
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn legality(&self) -> &[bool] {
        &self.legal
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from_model(self))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// Outcome of [`validate_rmdp`]: empty when the model is well formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks row sums, reward range, legality coverage and the uncertainty radius.
///
/// Indices in messages are 1-based for steps and 0-based for states and
/// actions, e.g. `row (h=1,s=0,a=0) sums to 0.9`.
pub fn validate_rmdp(model: &FiniteRmdp) -> ValidationReport {
    let mut violations = Vec::new();
    let spec = model.uncertainty;
    if !(spec.radius >= 0.0 && spec.radius.is_finite()) {
        violations.push(format!("uncertainty radius {} is not >= 0", spec.radius));
    }
    for h in 0..model.horizon {
        for s in 0..model.num_states {
            let mut any_legal = false;
            for a in 0..model.num_actions {
                let r = model.reward(h, s, a);
                if !(0.0..=1.0).contains(&r) {
                    violations.push(format!(
                        "reward out of [0,1]: r(h={},s={s},a={a}) = {r}",
                        h + 1
                    ));
                }
                if !model.is_legal(h, s, a) {
                    continue;
                }
                any_legal = true;
                let row = model.row(h, s, a);
                if let Some(p) = row.iter().find(|p| !(**p >= 0.0)) {
                    violations.push(format!(
                        "row (h={},s={s},a={a}) has negative or NaN entry {p}",
                        h + 1
                    ));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    violations.push(format!("row (h={},s={s},a={a}) sums to {sum}", h + 1));
                }
            }
            if !any_legal {
                violations.push(format!("no legal action at (h={},s={s})", h + 1));
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "S")]
    num_states: usize,
    #[serde(rename = "A")]
    num_actions: usize,
    #[serde(rename = "H")]
    horizon: usize,
    kernel: Vec<Vec<Vec<Vec<f64>>>>,
    reward: Vec<Vec<Vec<f64>>>,
    legal: Vec<Vec<Vec<bool>>>,
    divergence: DivergenceSpec,
    initial_state: usize,
}

fn flatten3<T: Copy>(nested: &[Vec<Vec<T>>], dims: [usize; 3], what: &str) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(dims.iter().product());
    if nested.len() != dims[0] {
        return Err(Error::InvalidParameter(format!(
            "{what}: expected {} steps, found {}",
            dims[0],
            nested.len()
        )));
    }
    for (h, by_state) in nested.iter().enumerate() {
        if by_state.len() != dims[1] {
            return Err(Error::InvalidParameter(format!(
                "{what}[{h}]: expected {} states, found {}",
                dims[1],
                by_state.len()
            )));
        }
        for (s, by_action) in by_state.iter().enumerate() {
            if by_action.len() != dims[2] {
                return Err(Error::InvalidParameter(format!(
                    "{what}[{h}][{s}]: expected {} entries, found {}",
                    dims[2],
                    by_action.len()
                )));
            }
            out.extend_from_slice(by_action);
        }
    }
    Ok(out)
}

impl ModelFile {
    fn from_model(m: &FiniteRmdp) -> Self {
        let (hn, sn, an) = (m.horizon, m.num_states, m.num_actions);
        let kernel = (0..hn)
            .map(|h| {
                (0..sn)
                    .map(|s| (0..an).map(|a| m.row(h, s, a).to_vec()).collect())
                    .collect()
            })
            .collect();
        let reward = (0..hn)
            .map(|h| {
                (0..sn)
                    .map(|s| (0..an).map(|a| m.reward(h, s, a)).collect())
                    .collect()
            })
            .collect();
        let legal = (0..hn)
            .map(|h| {
                (0..sn)
                    .map(|s| (0..an).map(|a| m.is_legal(h, s, a)).collect())
                    .collect()
            })
            .collect();
        Self {
            num_states: sn,
            num_actions: an,
            horizon: hn,
            kernel,
            reward,
            legal,
            divergence: m.uncertainty,
            initial_state: m.initial_state,
        }
    }

    fn into_model(self) -> Result<FiniteRmdp> {
        let (hn, sn, an) = (self.horizon, self.num_states, self.num_actions);
        let mut kernel = Vec::with_capacity(hn * sn * an * sn);
        if self.kernel.len() != hn {
            return Err(Error::InvalidParameter(format!(
                "kernel: expected {hn} steps, found {}",
                self.kernel.len()
            )));
        }
        for (h, step) in self.kernel.iter().enumerate() {
            let rows = flatten3(step, [sn, an, sn], &format!("kernel[{h}]"))?;
            kernel.extend(rows);
        }
        let reward = flatten3(&self.reward, [hn, sn, an], "reward")?;
        let legal = flatten3(&self.legal, [hn, sn, an], "legal")?;
        FiniteRmdp::from_raw(
            sn,
            an,
            hn,
            kernel,
            reward,
            legal,
            self.divergence,
            self.initial_state,
        )
    }
}

/// Deterministic Markov policy `pi[h][s]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicPolicy {
    num_states: usize,
    actions: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn from_actions(horizon: usize, num_states: usize, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != horizon * num_states {
            return Err(Error::LengthMismatch {
                left: actions.len(),
                right: horizon * num_states,
            });
        }
        Ok(Self {
            num_states,
            actions,
        })
    }

    /// Lowest-index legal action everywhere.
    pub fn first_legal(model: &FiniteRmdp) -> Self {
        let actions = (0..model.horizon())
            .flat_map(|h| {
                (0..model.num_states()).map(move |s| model.legal_actions(h, s).next().unwrap_or(0))
            })
            .collect();
        Self {
            num_states: model.num_states(),
            actions,
        }
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.num_states + s]
    }

    pub fn set_action(&mut self, h: usize, s: usize, a: usize) {
        self.actions[h * self.num_states + s] = a;
    }

    pub fn horizon(&self) -> usize {
        self.actions.len() / self.num_states
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// First `(h, s, a)` whose action is illegal in `model`, if any.
    pub fn first_illegal(&self, model: &FiniteRmdp) -> Option<(usize, usize, usize)> {
        for h in 0..model.horizon() {
            for s in 0..model.num_states() {
                let a = self.action(h, s);
                if a >= model.num_actions() || !model.is_legal(h, s, a) {
                    return Some((h, s, a));
                }
            }
        }
        None
    }
}

/// `V[h][s]` for `h` in `0..=H`; the row at `H` is the zero terminal value.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    horizon: usize,
    num_states: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(horizon: usize, num_states: usize) -> Self {
        Self {
            horizon,
            num_states,
            values: vec![0.0; (horizon + 1) * num_states],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.num_states + s]
    }

    #[inline]
    pub fn set(&mut self, h: usize, s: usize, v: f64) {
        self.values[h * self.num_states + s] = v;
    }

    /// The whole vector `V[h][.]`.
    #[inline]
    pub fn step(&self, h: usize) -> &[f64] {
        &self.values[h * self.num_states..(h + 1) * self.num_states]
    }

    pub fn step_mut(&mut self, h: usize) -> &mut [f64] {
        &mut self.values[h * self.num_states..(h + 1) * self.num_states]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// `Q[h][s][a]` for `h` in `0..H`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            values: vec![0.0; horizon * num_states * num_actions],
        }
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize) -> f64 {
        self.values[(h * self.num_states + s) * self.num_actions + a]
    }

    #[inline]
    pub fn set(&mut self, h: usize, s: usize, a: usize, q: f64) {
        self.values[(h * self.num_states + s) * self.num_actions + a] = q;
    }

    /// The `S x A` block for step `h`, row-major in `s`.
    pub fn step_mut(&mut self, h: usize) -> &mut [f64] {
        let block = self.num_states * self.num_actions;
        &mut self.values[h * block..(h + 1) * block]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub step: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeTrajectory {
    pub steps: Vec<Transition>,
}

impl EpisodeTrajectory {
    /// True when each step's next state is the following step's state.
    pub fn is_chained(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[0].next_state == w[1].state && w[0].step + 1 == w[1].step)
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|t| t.reward).sum()
    }
}

/// Visit counts `N_h(s,a,s')` and `N_h(s,a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitCounts {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    triples: Vec<u64>,
    pairs: Vec<u64>,
}

impl VisitCounts {
    pub fn new(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let pairs = horizon * num_states * num_actions;
        Self {
            num_states,
            num_actions,
            horizon,
            triples: vec![0; pairs * num_states],
            pairs: vec![0; pairs],
        }
    }

    pub fn for_model(model: &FiniteRmdp) -> Self {
        Self::new(model.horizon(), model.num_states(), model.num_actions())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn pair_index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * self.num_actions + a
    }

    pub fn record(&mut self, h: usize, s: usize, a: usize, next: usize) {
        let p = self.pair_index(h, s, a);
        self.pairs[p] += 1;
        self.triples[p * self.num_states + next] += 1;
    }

    pub fn record_trajectory(&mut self, traj: &EpisodeTrajectory) {
        for t in &traj.steps {
            self.record(t.step, t.state, t.action, t.next_state);
        }
    }

    #[inline]
    pub fn pair(&self, h: usize, s: usize, a: usize) -> u64 {
        self.pairs[self.pair_index(h, s, a)]
    }

    #[inline]
    pub fn triple_row(&self, h: usize, s: usize, a: usize) -> &[u64] {
        let start = self.pair_index(h, s, a) * self.num_states;
        &self.triples[start..start + self.num_states]
    }

    /// Total number of recorded transitions.
    pub fn total(&self) -> u64 {
        self.pairs.iter().sum()
    }

    /// Checks `N_h(s,a) = sum_s' N_h(s,a,s')` for every pair.
    pub fn is_consistent(&self) -> bool {
        self.pairs.iter().enumerate().all(|(p, &n)| {
            let row = &self.triples[p * self.num_states..(p + 1) * self.num_states];
            row.iter().sum::<u64>() == n
        })
    }

    /// Every count in `self` is at least the matching count in `earlier`.
    pub fn dominates(&self, earlier: &VisitCounts) -> bool {
        self.triples.len() == earlier.triples.len()
            && self
                .triples
                .iter()
                .zip(&earlier.triples)
                .all(|(now, before)| now >= before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(h: usize) -> FiniteRmdp {
        // 0 -> 1 -> 1 deterministic, single action, reward 1 in state 1.
        let s = 2;
        let mut kernel = Vec::new();
        let mut reward = Vec::new();
        for _ in 0..h {
            kernel.extend_from_slice(&[0.0, 1.0]);
            kernel.extend_from_slice(&[0.0, 1.0]);
            reward.extend_from_slice(&[0.0, 1.0]);
        }
        FiniteRmdp::new(
            s,
            1,
            h,
            kernel,
            reward,
            vec![true; h * s],
            DivergenceSpec::chi2(0.1).unwrap(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn well_formed_chain_validates() {
        assert!(validate_rmdp(&chain(3)).is_ok());
    }

    #[test]
    fn short_row_is_reported() {
        let m = chain(2);
        let mut kernel = m.kernel().to_vec();
        kernel[1] = 0.9;
        let bad = FiniteRmdp::from_raw(
            2,
            1,
            2,
            kernel,
            m.rewards().to_vec(),
            m.legality().to_vec(),
            m.uncertainty(),
            0,
        )
        .unwrap();
        let report = validate_rmdp(&bad);
        assert_eq!(
            report.violations,
            vec!["row (h=1,s=0,a=0) sums to 0.9".to_string()]
        );
    }

    #[test]
    fn reward_out_of_range_is_reported() {
        let m = chain(2);
        let mut reward = m.rewards().to_vec();
        reward[1] = 1.5;
        let bad = FiniteRmdp::from_raw(
            2,
            1,
            2,
            m.kernel().to_vec(),
            reward,
            m.legality().to_vec(),
            m.uncertainty(),
            0,
        )
        .unwrap();
        let report = validate_rmdp(&bad);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].starts_with("reward out of [0,1]"));
        assert!(FiniteRmdp::new(
            2,
            1,
            2,
            m.kernel().to_vec(),
            vec![1.5; 4],
            m.legality().to_vec(),
            m.uncertainty(),
            0
        )
        .is_err());
    }

    #[test]
    fn missing_legal_action_is_reported() {
        let m = chain(1);
        let bad = FiniteRmdp::from_raw(
            2,
            1,
            1,
            m.kernel().to_vec(),
            m.rewards().to_vec(),
            vec![true, false],
            m.uncertainty(),
            0,
        )
        .unwrap();
        let report = validate_rmdp(&bad);
        assert_eq!(
            report.violations,
            vec!["no legal action at (h=1,s=1)".to_string()]
        );
    }

    #[test]
    fn json_uses_the_documented_field_names() {
        let text = chain(1).to_json_string().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in [
            "S",
            "A",
            "H",
            "kernel",
            "reward",
            "legal",
            "divergence",
            "initial_state",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["divergence"]["kind"], "Chi2");
        assert_eq!(v["divergence"]["sigma"], 0.1);
        assert_eq!(v["kernel"][0][0][0], serde_json::json!([0.0, 1.0]));
    }

    #[test]
    fn json_shape_errors_are_rejected() {
        let text = r#"{"S":2,"A":1,"H":1,"kernel":[[[[0.0,1.0]]]],"reward":[[[0.0],[1.0]]],
            "legal":[[[true],[true]]],"divergence":{"kind":"kl","sigma":0.1},"initial_state":0}"#;
        assert!(FiniteRmdp::from_json_str(text).is_err());
    }

    #[test]
    fn counts_stay_consistent() {
        let mut c = VisitCounts::new(2, 3, 2);
        let before = c.clone();
        c.record(0, 1, 1, 2);
        c.record(0, 1, 1, 0);
        c.record(1, 2, 0, 2);
        assert!(c.is_consistent());
        assert_eq!(c.pair(0, 1, 1), 2);
        assert_eq!(c.triple_row(0, 1, 1), &[1, 0, 1]);
        assert_eq!(c.total(), 3);
        assert!(c.dominates(&before));
        assert!(!before.dominates(&c));
    }

    #[test]
    fn divergence_kind_parses() {
        assert_eq!(
            "Chi2".parse::<DivergenceKind>().unwrap(),
            DivergenceKind::Chi2
        );
        assert_eq!("KL".parse::<DivergenceKind>().unwrap(), DivergenceKind::Kl);
        assert!("hellinger".parse::<DivergenceKind>().is_err());
        assert!(DivergenceSpec::new(DivergenceKind::Tv, -0.1).is_err());
    }
}
