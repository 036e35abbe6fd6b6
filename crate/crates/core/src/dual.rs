//! Worst-case expectations `inf_{P in U(P*)} E_P[V]` over TV, chi-square and KL
//! balls, evaluated through their one-dimensional dual problems.
//!
//! * TV: `sup_eta { eta - E[(eta - V)_+] - (sigma/2)(eta - min V)_+ }`, piecewise
//!   linear with kinks at the values of `V`, so a scan over those values is exact.
//! * chi-square: `sup_{eta in [min V, max V]} { E[min(V,eta)] - sqrt(sigma Var(min(V,eta))) }`.
//!   Between two consecutive values of `V` the objective is concave (linear minus
//!   the square root of a convex quadratic), so each piece is maximized by
//!   ternary search and the best piece wins.
//! * KL: `sup_{eta in [eta_floor, range/sigma]} { -eta log E[exp(-V/eta)] - eta sigma }`,
//!   concave in `eta`; the `eta -> 0+` limit `min_{supp} V` is always a candidate.
//!
//! Mass outside the nominal support is forbidden for chi-square and KL and
//! allowed for TV, matching the usual f-divergence conventions.

use crate::error::{Error, Result};
use crate::model::{DivergenceKind, DivergenceSpec};

/// Tolerance on `sum(nominal) == 1` accepted by the solvers.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// Settings for the scalar dual-variable search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualSolverConfig {
    pub coarse_grid_points: usize,
    pub refine_iterations: usize,
    /// Lower end of the KL dual domain.
    pub eta_floor: f64,
    pub tolerance: f64,
}

impl Default for DualSolverConfig {
    fn default() -> Self {
        Self {
            coarse_grid_points: 64,
            refine_iterations: 60,
            eta_floor: 1e-6,
            tolerance: 1e-9,
        }
    }
}

impl DualSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_grid_points < 2 {
            return Err(Error::InvalidParameter(
                "coarse_grid_points must be >= 2".into(),
            ));
        }
        if self.refine_iterations == 0 {
            return Err(Error::InvalidParameter(
                "refine_iterations must be positive".into(),
            ));
        }
        if !(self.eta_floor > 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "eta_floor and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(Error::NotADistribution(format!("{what} has entry {x}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::NotADistribution(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn check_inputs(nominal: &[f64], values: &[f64]) -> Result<()> {
    check_distribution(nominal, "nominal")?;
    if nominal.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: nominal.len(),
            right: values.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite value {v}")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radius must be finite and >= 0, got {sigma}"
        )))
    }
}

/// `D_f(p || q) = sum_s q(s) f(p(s)/q(s))` for the three supported generators.
pub fn f_divergence(p: &[f64], q: &[f64], kind: DivergenceKind) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    Ok(f_divergence_unchecked(p, q, kind))
}

pub(crate) fn f_divergence_unchecked(p: &[f64], q: &[f64], kind: DivergenceKind) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if qi == 0.0 {
            if pi == 0.0 {
                continue;
            }
            match kind {
                DivergenceKind::Tv => total += pi,
                DivergenceKind::Chi2 | DivergenceKind::Kl => return f64::INFINITY,
            }
            continue;
        }
        let t = pi / qi;
        total += match kind {
            DivergenceKind::Tv => qi * (t - 1.0).abs(),
            DivergenceKind::Chi2 => qi * (t - 1.0) * (t - 1.0),
            DivergenceKind::Kl if pi == 0.0 => 0.0,
            DivergenceKind::Kl => pi * t.ln(),
        };
    }
    total
}

fn expectation(nominal: &[f64], values: &[f64]) -> f64 {
    nominal.iter().zip(values).map(|(p, v)| p * v).sum()
}

/// `(probability, value)` pairs over the nominal support, sorted by value.
fn sorted_support(nominal: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut support: Vec<(f64, f64)> = nominal
        .iter()
        .zip(values)
        .filter(|(p, _)| **p > 0.0)
        .map(|(&p, &v)| (p, v))
        .collect();
    support.sort_by(|a, b| a.1.total_cmp(&b.1));
    support
}

/// TV worst case via an exact scan over the kinks of the piecewise-linear dual.
pub fn robust_expectation_tv(nominal: &[f64], values: &[f64], sigma: f64) -> Result<f64> {
    check_inputs(nominal, values)?;
    check_sigma(sigma)?;
    let mean = expectation(nominal, values);
    if sigma == 0.0 {
        return Ok(mean);
    }
    let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let objective = |eta: f64| {
        let shortfall: f64 = nominal
            .iter()
            .zip(values)
            .map(|(p, v)| p * (eta - v).max(0.0))
            .sum();
        eta - shortfall - 0.5 * sigma * (eta - v_min).max(0.0)
    };
    let best = values
        .iter()
        .map(|&eta| objective(eta))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best.min(mean).max(v_min))
}

fn chi2_objective(support: &[(f64, f64)], sigma: f64, eta: f64) -> f64 {
    let mean: f64 = support.iter().map(|(p, v)| p * v.min(eta)).sum();
    let var: f64 = support
        .iter()
        .map(|(p, v)| {
            let d = v.min(eta) - mean;
            p * d * d
        })
        .sum();
    mean - (sigma * var.max(0.0)).sqrt()
}

/// Ternary search on `[lo, hi]` for a function known to be concave there.
/// Returns the best `(argmax, max)` seen, endpoints included.
fn ternary_refine<F: FnMut(f64) -> f64>(
    mut objective: F,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> Result<(f64, f64)> {
    let mut best = (lo, eval_finite(&mut objective, lo)?);
    let at_hi = eval_finite(&mut objective, hi)?;
    if at_hi > best.1 {
        best = (hi, at_hi);
    }
    for _ in 0..iterations {
        let width = hi - lo;
        if width <= 1e-15 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        let m1 = lo + width / 3.0;
        let m2 = hi - width / 3.0;
        let f1 = eval_finite(&mut objective, m1)?;
        let f2 = eval_finite(&mut objective, m2)?;
        if f1 > best.1 {
            best = (m1, f1);
        }
        if f2 > best.1 {
            best = (m2, f2);
        }
        if f1 < f2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(best)
}

fn eval_finite<F: FnMut(f64) -> f64>(objective: &mut F, x: f64) -> Result<f64> {
    let y = objective(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { value: y, at: x })
    }
}

/// Chi-square worst case.
pub fn robust_expectation_chi2(
    nominal: &[f64],
    values: &[f64],
    sigma: f64,
    cfg: &DualSolverConfig,
) -> Result<f64> {
    check_inputs(nominal, values)?;
    check_sigma(sigma)?;
    let support = sorted_support(nominal, values);
    let (v_min, v_max) = (support[0].1, support[support.len() - 1].1);
    let mean = expectation(nominal, values);
    if sigma == 0.0 || v_min == v_max {
        return Ok(mean);
    }
    let mut best = v_min;
    let mut lo = v_min;
    for &(_, v) in &support[1..] {
        if v <= lo {
            continue;
        }
        let (_, piece_best) = ternary_refine(
            |eta| chi2_objective(&support, sigma, eta),
            lo,
            v,
            cfg.refine_iterations,
        )?;
        best = best.max(piece_best);
        lo = v;
    }
    Ok(best.min(mean))
}

/// KL worst case. `sigma = 0` returns the nominal mean without a dual search.
pub fn robust_expectation_kl(
    nominal: &[f64],
    values: &[f64],
    sigma: f64,
    cfg: &DualSolverConfig,
) -> Result<f64> {
    check_inputs(nominal, values)?;
    check_sigma(sigma)?;
    let support = sorted_support(nominal, values);
    let (v_min, v_max) = (support[0].1, support[support.len() - 1].1);
    let mean = expectation(nominal, values);
    if sigma == 0.0 || v_min == v_max {
        return Ok(mean);
    }
    // The maximizer satisfies KL(Q_eta || P) = sigma and KL(Q_eta || P) <= range/eta.
    let hi = ((v_max - v_min) / sigma).max(cfg.eta_floor);
    let objective = |eta: f64| {
        let z: f64 = support
            .iter()
            .map(|(p, v)| p * (-(v - v_min) / eta).exp())
            .sum();
        -eta * z.ln() + v_min - eta * sigma
    };
    let (_, searched) = maximize_unimodal_1d(objective, cfg.eta_floor, hi, cfg)?;
    Ok(searched.max(v_min).min(mean))
}

/// Dispatches on `spec.kind`.
pub fn robust_expectation(
    nominal: &[f64],
    values: &[f64],
    spec: &DivergenceSpec,
    cfg: &DualSolverConfig,
) -> Result<f64> {
    match spec.kind {
        DivergenceKind::Tv => robust_expectation_tv(nominal, values, spec.radius),
        DivergenceKind::Chi2 => robust_expectation_chi2(nominal, values, spec.radius, cfg),
        DivergenceKind::Kl => robust_expectation_kl(nominal, values, spec.radius, cfg),
    }
}

/// Coarse grid scan followed by ternary refinement around the best grid point.
///
/// Exact to `cfg.tolerance` for unimodal objectives; otherwise the best
/// evaluation seen is returned.
pub fn maximize_unimodal_1d<F: FnMut(f64) -> f64>(
    mut objective: F,
    lo: f64,
    hi: f64,
    cfg: &DualSolverConfig,
) -> Result<(f64, f64)> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInterval { lo, hi });
    }
    if lo == hi {
        return Ok((lo, eval_finite(&mut objective, lo)?));
    }
    let n = cfg.coarse_grid_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let grid = |i: usize| if i + 1 == n { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let y = eval_finite(&mut objective, grid(i))?;
        if y > best {
            best = y;
            best_i = i;
        }
    }
    let left = grid(best_i.saturating_sub(1));
    let right = grid((best_i + 1).min(n - 1));
    let refined = ternary_refine(&mut objective, left, right, cfg.refine_iterations)?;
    if refined.1 > best {
        Ok(refined)
    } else {
        Ok((grid(best_i), best))
    }
}
