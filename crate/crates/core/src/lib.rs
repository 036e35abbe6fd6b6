//! Online reinforcement learning in robust MDPs with f-divergence uncertainty sets.
//!
//! Tabular finite-horizon models, exact robust dynamic programming through
//! one-dimensional dual problems, the optimistic RVI-f learner, a UCB-VI
//! baseline, benchmark environments and an experiment harness.
//!
//! Data parallelism over states (and over experiment runs) uses rayon behind
//! the default `parallel` feature; without it every [`par::Exec`] runs
//! sequentially.

pub mod agent;
pub mod baseline;
pub mod dp;
pub mod dual;
pub mod envs;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod par;

pub use agent::{rvi_run, AgentConfig, BonusPreset, OnlineRun};
pub use baseline::ucbvi_run;
pub use dp::{robust_policy_evaluation, robust_value_iteration, RobustSolution};
pub use dual::{robust_expectation, DualSolverConfig};
pub use error::{Error, Result};
pub use model::{
    validate_rmdp, DeterministicPolicy, DivergenceKind, DivergenceSpec, FiniteRmdp, ValueTable,
    VisitCounts,
};
pub use par::Exec;
