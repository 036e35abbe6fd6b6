//! Benchmark models.

pub mod frozen_lake;
pub mod gambler;
pub mod hard_instance;

pub use frozen_lake::{build_frozen_lake, LakeGrid, LakeLayout};
pub use gambler::{build_gambler, build_gambler_with, GamblerParams};
pub use hard_instance::{build_hard_instance, HardInstance, HardInstanceSpec};
