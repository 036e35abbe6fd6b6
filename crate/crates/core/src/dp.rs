//! Exact robust dynamic programming on a known model.

use crate::dual::{robust_expectation, DualSolverConfig};
use crate::error::{Error, Result};
use crate::model::{DeterministicPolicy, FiniteRmdp, QTable, ValueTable};
use crate::par::{map_range, Exec};

/// Optimal robust values, Q-values and a greedy deterministic policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustSolution {
    pub values: ValueTable,
    pub q: QTable,
    pub policy: DeterministicPolicy,
}

/// Index of the largest entry among `legal` ones; ties go to the lowest index.
pub(crate) fn argmax_legal(q: &[f64], legal: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (a, &v) in q.iter().enumerate() {
        if !legal(a) {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((a, v)),
        }
    }
    best
}

/// Backward induction with the robust Bellman optimality operator.
pub fn robust_value_iteration(
    model: &FiniteRmdp,
    cfg: &DualSolverConfig,
) -> Result<RobustSolution> {
    robust_value_iteration_with(model, cfg, Exec::default())
}

pub fn robust_value_iteration_with(
    model: &FiniteRmdp,
    cfg: &DualSolverConfig,
    exec: Exec,
) -> Result<RobustSolution> {
    let spec = model.uncertainty();
    backward_optimal(model, exec, |row, next| {
        robust_expectation(row, next, &spec, cfg)
    })
}

/// Standard (non-robust) finite-horizon value iteration.
pub fn value_iteration(model: &FiniteRmdp) -> RobustSolution {
    backward_optimal(model, Exec::Sequential, |row, next| {
        Ok(row.iter().zip(next).map(|(p, v)| p * v).sum())
    })
    .expect("nominal backup is infallible")
}

fn backward_optimal<F>(model: &FiniteRmdp, exec: Exec, backup: F) -> Result<RobustSolution>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync + Send,
{
    let (horizon, ns, na) = (model.horizon(), model.num_states(), model.num_actions());
    let mut values = ValueTable::zeros(horizon, ns);
    let mut q = QTable::zeros(horizon, ns, na);
    let mut policy = DeterministicPolicy::first_legal(model);
    for h in (0..horizon).rev() {
        let next = values.step(h + 1).to_vec();
        let rows: Vec<Result<Vec<f64>>> = map_range(exec, ns, |s| {
            (0..na)
                .map(|a| {
                    if model.is_legal(h, s, a) {
                        Ok(model.reward(h, s, a) + backup(model.row(h, s, a), &next)?)
                    } else {
                        Ok(0.0)
                    }
                })
                .collect()
        });
        for (s, row) in rows.into_iter().enumerate() {
            let row = row?;
            let (best_a, best_v) =
                argmax_legal(&row, |a| model.is_legal(h, s, a)).expect("validated model");
            for (a, v) in row.into_iter().enumerate() {
                q.set(h, s, a, v);
            }
            values.set(h, s, best_v);
            policy.set_action(h, s, best_a);
        }
    }
    Ok(RobustSolution { values, q, policy })
}

/// Robust value of a fixed deterministic policy.
pub fn robust_policy_evaluation(
    model: &FiniteRmdp,
    policy: &DeterministicPolicy,
    cfg: &DualSolverConfig,
) -> Result<ValueTable> {
    robust_policy_evaluation_with(model, policy, cfg, Exec::default())
}

pub fn robust_policy_evaluation_with(
    model: &FiniteRmdp,
    policy: &DeterministicPolicy,
    cfg: &DualSolverConfig,
    exec: Exec,
) -> Result<ValueTable> {
    let spec = model.uncertainty();
    backward_policy(model, policy, exec, |row, next| {
        robust_expectation(row, next, &spec, cfg)
    })
}

/// Standard (non-robust) evaluation of a fixed policy.
pub fn policy_evaluation(model: &FiniteRmdp, policy: &DeterministicPolicy) -> Result<ValueTable> {
    backward_policy(model, policy, Exec::Sequential, |row, next| {
        Ok(row.iter().zip(next).map(|(p, v)| p * v).sum())
    })
}

fn backward_policy<F>(
    model: &FiniteRmdp,
    policy: &DeterministicPolicy,
    exec: Exec,
    backup: F,
) -> Result<ValueTable>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync + Send,
{
    if policy.horizon() != model.horizon() || policy.num_states() != model.num_states() {
        return Err(Error::LengthMismatch {
            left: policy.actions().len(),
            right: model.horizon() * model.num_states(),
        });
    }
    if let Some((step, state, action)) = policy.first_illegal(model) {
        return Err(Error::IllegalAction {
            step,
            state,
            action,
        });
    }
    let (horizon, ns) = (model.horizon(), model.num_states());
    let mut values = ValueTable::zeros(horizon, ns);
    for h in (0..horizon).rev() {
        let next = values.step(h + 1).to_vec();
        let step: Vec<Result<f64>> = map_range(exec, ns, |s| {
            let a = policy.action(h, s);
            Ok(model.reward(h, s, a) + backup(model.row(h, s, a), &next)?)
        });
        for (s, v) in step.into_iter().enumerate() {
            values.set(h, s, v?);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DivergenceSpec;
    use approx::assert_abs_diff_eq;

    /// Two states, two actions: action 0 stays, action 1 jumps to state 1
    /// with probability 0.7. State 1 pays 1 per step.
    fn small(h: usize, spec: DivergenceSpec) -> FiniteRmdp {
        let mut kernel = Vec::new();
        let mut reward = Vec::new();
        for _ in 0..h {
            kernel.extend_from_slice(&[1.0, 0.0, 0.3, 0.7]);
            kernel.extend_from_slice(&[0.0, 1.0, 0.2, 0.8]);
            reward.extend_from_slice(&[0.0, 0.0, 1.0, 0.5]);
        }
        FiniteRmdp::new(2, 2, h, kernel, reward, vec![true; 4 * h], spec, 0).unwrap()
    }

    #[test]
    fn one_step_horizon_is_myopic() {
        for sigma in [0.0, 0.4, 2.0] {
            let m = small(1, DivergenceSpec::chi2(sigma).unwrap());
            let sol = robust_value_iteration(&m, &DualSolverConfig::default()).unwrap();
            assert_eq!(sol.values.get(0, 0), 0.0);
            assert_eq!(sol.values.get(0, 1), 1.0);
            assert_eq!(sol.policy.action(0, 0), 0);
        }
    }

    #[test]
    fn zero_radius_matches_nominal_iteration() {
        let m = small(5, DivergenceSpec::kl(0.0).unwrap());
        let robust = robust_value_iteration(&m, &DualSolverConfig::default()).unwrap();
        let plain = value_iteration(&m);
        for (a, b) in robust.values.as_slice().iter().zip(plain.values.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert_eq!(robust.policy, plain.policy);
    }

    #[test]
    fn evaluating_the_optimal_policy_reproduces_its_values() {
        let cfg = DualSolverConfig::default();
        for spec in [
            DivergenceSpec::tv(0.3).unwrap(),
            DivergenceSpec::chi2(0.3).unwrap(),
            DivergenceSpec::kl(0.3).unwrap(),
        ] {
            let m = small(6, spec);
            let sol = robust_value_iteration(&m, &cfg).unwrap();
            let v = robust_policy_evaluation(&m, &sol.policy, &cfg).unwrap();
            for (a, b) in v.as_slice().iter().zip(sol.values.as_slice()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn illegal_policy_is_rejected() {
        let m = small(2, DivergenceSpec::chi2(0.1).unwrap());
        let bad = DeterministicPolicy::from_actions(2, 2, vec![0, 3, 0, 0]).unwrap();
        assert!(matches!(
            robust_policy_evaluation(&m, &bad, &DualSolverConfig::default()),
            Err(Error::IllegalAction {
                step: 0,
                state: 1,
                action: 3
            })
        ));
    }

    #[test]
    fn ties_go_to_the_lowest_action() {
        assert_eq!(argmax_legal(&[1.0, 1.0, 0.5], |_| true), Some((0, 1.0)));
        assert_eq!(argmax_legal(&[1.0, 1.0, 2.0], |a| a != 2), Some((0, 1.0)));
        assert_eq!(argmax_legal(&[1.0], |_| false), None);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = DualSolverConfig::default();
        let m = small(8, DivergenceSpec::chi2(0.5).unwrap());
        let a = robust_value_iteration_with(&m, &cfg, Exec::Sequential).unwrap();
        let b = robust_value_iteration_with(&m, &cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
