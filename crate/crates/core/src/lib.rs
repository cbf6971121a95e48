//! Robust path-following control kernels: LTI algebra, the single-track
//! vehicle plant, disturbance observers (DOB, CDOB, double DOB), parameter
//! space PD design, small-gain robustness tests and a fixed-step closed-loop
//! scenario runner.
//!
//! The crate is `no_std` and only needs `alloc`. Float math goes through
//! `num_traits::Float` (backed by `libm`); those imports are marked
//! `allow(unused_imports)` because std's inherent methods take over whenever
//! std is in the build graph, as it is under `cargo test`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod control;
pub mod delay;
pub mod dstability;
pub mod error;
pub mod freq;
pub mod linalg;
pub mod loops;
pub mod poly;
pub mod robustness;
pub mod scenario;
pub mod ss;
pub mod tf;
pub mod vehicle;

pub use control::{PdGains, QFilter};
pub use delay::DelayLine;
pub use dstability::DRegion;
pub use error::{Error, Result};
pub use freq::FrequencyResponse;
pub use linalg::Matrix;
pub use loops::{Architecture, ClosedLoop, LoopConfig, PlantSpec, SimTrace};
pub use poly::Polynomial;
pub use scenario::{Metrics, Profile, Scenario};
pub use ss::StateSpaceModel;
pub use tf::TransferFunction;
pub use vehicle::{UncertaintyBox, VehicleParams};
