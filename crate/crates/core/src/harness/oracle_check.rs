//! Randomized comparison of the dual solvers against the brute-force oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::dual::{robust_expectation, DualSolverConfig};
use crate::error::Result;
use crate::model::DivergenceSpec;
use crate::oracle::worst_case_oracle;

/// Oracle grid resolution used by the suite.
pub const ORACLE_RESOLUTION: f64 = 1e-3;

/// Dual and oracle may differ by this fraction of the value range, on top of the grid slack.
pub const RELATIVE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMismatch {
    pub nominal: Vec<f64>,
    pub values: Vec<f64>,
    pub dual: f64,
    pub oracle: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckReport {
    pub spec: DivergenceSpec,
    pub instances: usize,
    /// Largest `|dual - oracle|` divided by the allowance; at most 1 when all pass.
    pub worst_ratio: f64,
    pub mismatches: Vec<OracleMismatch>,
}

impl OracleCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// A random distribution with full support on `n` points and values in `[0, scale)`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let weights: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let nominal = weights.iter().map(|w| w / total).collect();
    let values = (0..n).map(|_| scale * rng.random::<f64>()).collect();
    (nominal, values)
}

/// Runs `instances` random 3-point problems for `spec` and records every
/// instance where the dual leaves the allowance.
pub fn oracle_check(
    spec: DivergenceSpec,
    instances: usize,
    seed: u64,
) -> Result<OracleCheckReport> {
    let cfg = DualSolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..instances {
        let scale = rng.random_range(0.5..20.0);
        let (nominal, values) = random_instance(&mut rng, 3, scale);
        let dual = robust_expectation(&nominal, &values, &spec, &cfg)?;
        let oracle = worst_case_oracle(&nominal, &values, &spec, ORACLE_RESOLUTION)?;
        let range = values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().copied().fold(f64::INFINITY, f64::min);
        let allowed = RELATIVE_TOLERANCE * range + oracle.slack;
        let diff = (dual - oracle.value).abs();
        worst_ratio = worst_ratio.max(diff / allowed.max(f64::MIN_POSITIVE));
        if diff > allowed {
            mismatches.push(OracleMismatch {
                nominal,
                values,
                dual,
                oracle: oracle.value,
                allowed,
            });
        }
    }
    Ok(OracleCheckReport {
        spec,
        instances,
        worst_ratio,
        mismatches,
    })
}
