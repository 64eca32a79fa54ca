//! Saddle-point escape for nonconvex optimization with perturbations drawn
//! from a simulated Gaussian wave packet.
//!
//! The packet is evolved either in closed form (quadratic potentials, any
//! dimension) or with a finite-difference Schrödinger solver (general
//! potentials, up to three dimensions). The optimizers use the measured
//! position as the perturbation direction at points with small gradient.
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod analytic;
pub mod bench;
pub mod config;
pub mod error;
pub mod landscapes;
pub mod linalg;
pub mod optim;
pub mod perturb;
pub mod scalar;
pub mod validate;
pub mod wavesim;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::Matrix<f64>;
pub type GaussianLaw = analytic::GaussianLaw<f64>;
pub type ScheduleParams = perturb::ScheduleParams<f64>;
pub type Trajectory = optim::Trajectory<f64>;
pub type WaveState = wavesim::WaveState<f64>;
pub type GridSpec = wavesim::GridSpec<f64>;
