//! Simulation and verification toolkit for networks of leaky integrate-and-fire
//! units driven by cluster-coupled Poisson input.
//!
//! The crate covers three layers:
//!
//! - **Jump level**: exact event-driven simulation of a multivariate Stein
//!   process, i.e. exponential decay toward zero between Poisson-driven jumps
//!   of fixed amplitudes, where cluster streams make whole subsets of
//!   components jump at the same instant ([`stein`]).
//! - **Diffusion level**: the correlated Ornstein-Uhlenbeck process that the
//!   jump model approaches as jumps shrink and rates grow, sampled with its
//!   exact Gaussian transition ([`ou`]).
//! - **Firing level**: first-passage times through per-component boundaries
//!   with component-wise reset, producing marked spike trains, plus the
//!   statistical machinery to compare jump-level and diffusion-level trains
//!   ([`fpt`], [`stats`]).
//!
//! All stochastic entry points take explicit seed streams ([`rng::SeedStream`])
//! and are bit-reproducible for a fixed seed and build.

pub mod config;
pub mod error;
pub mod fpt;
pub mod linalg;
pub mod model;
pub mod ou;
pub mod presets;
pub mod rng;
pub mod serialize;
pub mod stats;
pub mod stein;

pub use error::Error;
pub use fpt::{run_ou_with_reset, run_stein_with_reset, superpose, MarkedTrain, SpikeRecord, Stop};
pub use linalg::{cholesky_factor, Mat};
pub use model::{
    characteristic_exponent, limit_covariance, limit_drift, scale_params, stein_moments,
    LimitParams, NetworkSpec, SteinParams,
};
pub use ou::{ou_step_law, simulate_ou, GridPath};
pub use rng::SeedStream;
pub use stein::{evaluate, martingale_part, simulate_stein, JumpEvent, JumpPath};
