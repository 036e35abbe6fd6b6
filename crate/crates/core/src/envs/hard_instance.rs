//! Three-state hard instances used for regret lower bounds.
//!
//! From `s1` every action moves to `s2` with probability `p` and to `s3`
//! otherwise; `s2` and `s3` are absorbing. `s3` pays 1 per step. In `s2` the
//! reward is Gaussian with unit variance around a per-action mean; the model
//! handed to agents uses the means as deterministic rewards.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{DivergenceKind, DivergenceSpec, FiniteRmdp};

pub const S1: usize = 0;
pub const S2: usize = 1;
pub const S3: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardInstanceSpec {
    pub num_actions: usize,
    pub branch_prob: f64,
    pub horizon: usize,
    /// Action whose mean is boosted; `0` is the base instance with no boost.
    pub special_action_index: usize,
    pub base_mean: f64,
    /// Multiplier applied to `base_mean` for the special action.
    pub boost_factor: f64,
    pub divergence: DivergenceSpec,
}

impl HardInstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_actions == 0 || self.horizon < 2 {
            return Err(Error::InvalidParameter(
                "hard instance needs A >= 1 and H >= 2".into(),
            ));
        }
        if !(self.branch_prob > 0.0 && self.branch_prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "branch probability must lie in (0, 1), got {}",
                self.branch_prob
            )));
        }
        if self.special_action_index >= self.num_actions {
            return Err(Error::InvalidParameter(format!(
                "special action {} out of range for A={}",
                self.special_action_index, self.num_actions
            )));
        }
        if !(0.0..1.0).contains(&self.base_mean) {
            return Err(Error::InvalidParameter(format!(
                "base mean must lie in [0, 1), got {}",
                self.base_mean
            )));
        }
        if self.special_action_index != 0 && !(self.boost_factor * self.base_mean < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "boosted mean {} must stay below 1",
                self.boost_factor * self.base_mean
            )));
        }
        Ok(())
    }

    /// Mean reward of each action in `s2`.
    pub fn means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.num_actions];
        means[0] = self.base_mean;
        if self.special_action_index != 0 {
            means[self.special_action_index] = self.boost_factor * self.base_mean;
        }
        means
    }
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    pub spec: HardInstanceSpec,
    pub model: FiniteRmdp,
    pub means: Vec<f64>,
}

pub fn build_hard_instance(spec: &HardInstanceSpec) -> Result<HardInstance> {
    spec.validate()?;
    let (ns, na, hn) = (3, spec.num_actions, spec.horizon);
    let means = spec.means();
    let mut kernel = vec![0.0; hn * ns * na * ns];
    let mut reward = vec![0.0; hn * ns * na];
    let pair = |h: usize, s: usize, a: usize| (h * ns + s) * na + a;
    for h in 0..hn {
        for a in 0..na {
            let row = pair(h, S1, a) * ns;
            if h == 0 {
                kernel[row + S2] = spec.branch_prob;
                kernel[row + S3] = 1.0 - spec.branch_prob;
            } else {
                kernel[row + S1] = 1.0;
            }
            kernel[pair(h, S2, a) * ns + S2] = 1.0;
            kernel[pair(h, S3, a) * ns + S3] = 1.0;
            reward[pair(h, S2, a)] = means[a];
            reward[pair(h, S3, a)] = 1.0;
        }
    }
    let model = FiniteRmdp::new(
        ns,
        na,
        hn,
        kernel,
        reward,
        vec![true; hn * ns * na],
        spec.divergence,
        S1,
    )?;
    Ok(HardInstance {
        spec: *spec,
        model,
        means,
    })
}

impl HardInstance {
    /// Noisy reward draw: `N(mu(a), 1)` in `s2`, 1 in `s3`, 0 in `s1`.
    pub fn sample_reward<R: Rng + ?Sized>(&self, state: usize, action: usize, rng: &mut R) -> f64 {
        match state {
            S2 => Normal::new(self.means[action], 1.0)
                .expect("unit variance")
                .sample(rng),
            S3 => 1.0,
            _ => 0.0,
        }
    }

    /// Worst-case probability of landing in `s2`.
    pub fn worst_branch_prob(&self) -> f64 {
        worst_case_branch_prob(self.spec.divergence, self.spec.branch_prob)
    }

    /// Robust value at `s1` of any policy whose `s2` action has mean `mean`.
    pub fn closed_form_value(&self, mean: f64) -> f64 {
        let tilde = self.worst_branch_prob();
        let rest = (self.spec.horizon - 1) as f64;
        tilde * rest * mean + (1.0 - tilde) * rest
    }
}

/// Largest `p'` with `D_f(Ber(p') || Ber(p)) <= sigma`, i.e. the worst-case
/// mass on the lower-valued branch.
pub fn worst_case_branch_prob(spec: DivergenceSpec, p: f64) -> f64 {
    let sigma = spec.radius;
    match spec.kind {
        DivergenceKind::Tv => (p + 0.5 * sigma).min(1.0),
        DivergenceKind::Chi2 => (p + (sigma * p * (1.0 - p)).sqrt()).min(1.0),
        DivergenceKind::Kl => {
            let kl = |q: f64| {
                let a = if q > 0.0 { q * (q / p).ln() } else { 0.0 };
                let b = if q < 1.0 {
                    (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln()
                } else {
                    0.0
                };
                a + b
            };
            if kl(1.0) <= sigma {
                return 1.0;
            }
            let (mut lo, mut hi) = (p, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if kl(mid) <= sigma {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }
}

/// Admissible KL radius window for the large-radius lower-bound instance
/// with `p = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlRadiusWindow {
    pub alpha: f64,
    pub beta: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

impl KlRadiusWindow {
    pub fn for_branch_prob(p: f64) -> Self {
        let alpha = 1.0 - p;
        let log_inv = (1.0 / alpha).ln();
        let beta = 0.5 * log_inv;
        Self {
            alpha,
            beta,
            sigma_lo: (1.0 - 3.0 / beta) * log_inv,
            sigma_hi: (1.0 - 2.0 / beta) * log_inv,
        }
    }

    /// `beta >= 4` and `sigma` inside the window.
    pub fn admits(&self, sigma: f64) -> bool {
        self.beta >= 4.0 && sigma >= self.sigma_lo && sigma <= self.sigma_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_rmdp;
    use rand::SeedableRng;

    fn spec(special: usize, mean: f64) -> HardInstanceSpec {
        HardInstanceSpec {
            num_actions: 4,
            branch_prob: 0.5,
            horizon: 6,
            special_action_index: special,
            base_mean: mean,
            boost_factor: 3f64.sqrt(),
            divergence: DivergenceSpec::chi2(0.5).unwrap(),
        }
    }

    #[test]
    fn construction() {
        let inst = build_hard_instance(&spec(2, 0.3)).unwrap();
        assert!(validate_rmdp(&inst.model).is_ok());
        assert_eq!(inst.model.row(0, S1, 3), &[0.0, 0.5, 0.5]);
        assert_eq!(inst.model.row(3, S2, 1), &[0.0, 1.0, 0.0]);
        assert_eq!(inst.means, vec![0.3, 0.0, 0.3 * 3f64.sqrt(), 0.0]);
        assert_eq!(inst.model.reward(2, S3, 0), 1.0);
    }

    #[test]
    fn chi2_worst_branch() {
        let inst = build_hard_instance(&spec(0, 0.0)).unwrap();
        assert!((inst.worst_branch_prob() - 0.853553).abs() < 1e-6);
    }

    #[test]
    fn kl_worst_branch_solves_the_ball_boundary() {
        let spec = DivergenceSpec::kl(0.1).unwrap();
        let q = worst_case_branch_prob(spec, 0.5);
        let kl = q * (2.0 * q).ln() + (1.0 - q) * (2.0 * (1.0 - q)).ln();
        assert!((kl - 0.1).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        assert!(build_hard_instance(&spec(2, 0.7)).is_err());
        assert!(build_hard_instance(&spec(9, 0.1)).is_err());
        assert!(build_hard_instance(&HardInstanceSpec {
            branch_prob: 1.0,
            ..spec(0, 0.1)
        })
        .is_err());
    }

    #[test]
    fn gaussian_rewards_center_on_the_means() {
        let inst = build_hard_instance(&spec(2, 0.3)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mean: f64 = (0..n)
            .map(|_| inst.sample_reward(S2, 2, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - inst.means[2]).abs() < 4.0 / (n as f64).sqrt());
        assert_eq!(inst.sample_reward(S3, 1, &mut rng), 1.0);
    }

    #[test]
    fn kl_window() {
        let w = KlRadiusWindow::for_branch_prob(1.0 - 1e-8);
        assert!(w.beta >= 4.0);
        assert!(w.admits(0.5 * (w.sigma_lo + w.sigma_hi)));
        assert!(!KlRadiusWindow::for_branch_prob(0.5).admits(0.1));
    }
}
