//! Brute-force primal worst case, used as ground truth for the dual solvers.
//!
//! The simplex over the candidate coordinates is enumerated on a grid of the
//! given resolution; every grid point inside the divergence ball is scored
//! and the lowest expectation wins. The nominal itself is always a candidate,
//! so the search never comes back empty.

use crate::dual::f_divergence_unchecked;
use crate::error::{Error, Result};
use crate::model::{DivergenceKind, DivergenceSpec};

/// Largest number of free coordinates the enumeration accepts.
pub const MAX_ORACLE_SUPPORT: usize = 4;

/// Coarsest resolution accepted.
pub const MAX_ORACLE_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Bound on how far `value` may sit above the exact infimum because of the grid.
    pub slack: f64,
}

/// Exhaustive grid search of `min E_P[V]` over `{P : D_f(P || nominal) <= sigma}`.
///
/// Chi-square and KL search the nominal support only (anything else has
/// infinite divergence); TV searches every coordinate.
pub fn worst_case_oracle(
    nominal: &[f64],
    values: &[f64],
    spec: &DivergenceSpec,
    resolution: f64,
) -> Result<OracleResult> {
    if nominal.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: nominal.len(),
            right: values.len(),
        });
    }
    if nominal.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if !(resolution > 0.0 && resolution <= MAX_ORACLE_RESOLUTION) {
        return Err(Error::InvalidParameter(format!(
            "oracle resolution must lie in (0, {MAX_ORACLE_RESOLUTION}], got {resolution}"
        )));
    }
    let coords: Vec<usize> = match spec.kind {
        DivergenceKind::Tv => (0..nominal.len()).collect(),
        DivergenceKind::Chi2 | DivergenceKind::Kl => {
            (0..nominal.len()).filter(|&i| nominal[i] > 0.0).collect()
        }
    };
    if coords.len() > MAX_ORACLE_SUPPORT {
        return Err(Error::SupportTooLarge(coords.len()));
    }
    let q: Vec<f64> = coords.iter().map(|&i| nominal[i]).collect();
    let v: Vec<f64> = coords.iter().map(|&i| values[i]).collect();
    let range = v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - v.iter().copied().fold(f64::INFINITY, f64::min);

    let budget = spec.radius * (1.0 + 1e-12) + 1e-12;
    let mut best_value: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
    let mut best_point = q.clone();

    let steps = (1.0 / resolution).round() as usize;
    let n = q.len();
    let mut point = vec![0.0; n];
    let mut counts = vec![0usize; n];
    enumerate(&mut counts, 0, steps, &mut |counts: &[usize]| {
        for (x, &c) in point.iter_mut().zip(counts) {
            *x = c as f64 / steps as f64;
        }
        let d = f_divergence_unchecked(&point, &q, spec.kind);
        if d > budget {
            return false;
        }
        let e: f64 = point.iter().zip(&v).map(|(a, b)| a * b).sum();
        if e < best_value {
            best_value = e;
            best_point.copy_from_slice(&point);
        }
        true
    });

    let mut argmin = vec![0.0; nominal.len()];
    for (&i, &p) in coords.iter().zip(&best_point) {
        argmin[i] = p;
    }
    Ok(OracleResult {
        value: best_value,
        argmin,
        slack: 2.0 * resolution * range.max(0.0),
    })
}

/// Walks all compositions of `remaining` into `counts[depth..]`.
///
/// The visitor returns whether the point was feasible. Along the innermost
/// coordinate the feasible set is an interval (the ball is convex), so the
/// scan stops once it has entered and left it.
fn enumerate<F: FnMut(&[usize]) -> bool>(
    counts: &mut [usize],
    depth: usize,
    remaining: usize,
    visit: &mut F,
) {
    let n = counts.len();
    if depth + 1 == n {
        counts[depth] = remaining;
        visit(counts);
        return;
    }
    if depth + 2 == n {
        let mut entered = false;
        for c in 0..=remaining {
            counts[depth] = c;
            counts[depth + 1] = remaining - c;
            let feasible = visit(counts);
            if feasible {
                entered = true;
            } else if entered {
                break;
            }
        }
        return;
    }
    for c in 0..=remaining {
        counts[depth] = c;
        enumerate(counts, depth + 1, remaining - c, visit);
    }
}
