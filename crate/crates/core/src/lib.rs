//! Thompson-sampling pure exploration for (combinatorial) multi-armed bandits.
//!
//! The crate is `no_std` with `alloc`. It contains the bandit model, the
//! super-arm families with their offline oracles, the TS-Explore policy, a
//! CLUCB-style baseline, hardness calculators and the monitors that replay a
//! recorded run against the concentration events used in its analysis.
//!
//! Everything that touches files, clocks or threads lives in the companion
//! `tsexplore-bench` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;

pub mod baselines;
pub mod hardness;
pub mod model;
pub mod sampler;
pub mod structures;
pub mod tsexplore;

pub use error::{Error, Result};
pub use model::{ArmStats, BanditInstance, Distribution, Environment, GapProfile};
pub use sampler::RandomStream;
pub use structures::{ArmSet, SuperArmFamily};
pub use tsexplore::{Decision, RunOutcome, TsConfig};
