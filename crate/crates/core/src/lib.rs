//! Energy-efficient power allocation for a two-user multiple-access channel
//! with simultaneous wireless information and power transfer.
//!
//! Two transmitters send to an information decoder while a separate receiver
//! harvests energy from the same signals and requires at least `chi` Joules
//! per block. [`allocator::solve`] returns the allocation maximising the sum
//! rate per net consumed energy, [`oracle`] is a brute-force cross-check and
//! [`sweep`] produces parameter sweeps as CSV.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

pub mod allocator;
pub mod error;
pub mod format;
pub mod lambert;
pub mod model;
pub mod oracle;
mod roots;
pub mod scalar;
pub mod scenario_file;
pub mod sweep;

pub use allocator::{
    chi_prime, chi_star, kkt_residuals, optimal_efficiency, solve, solve_with, thresholds, Regime,
};
pub use error::{Error, Result};
pub use lambert::{lambert_w0, solve_omega};
pub use model::{
    efficiency_baseline, efficiency_gradient, efficiency_net, harvested_energy, sum_rate,
    total_energy, Deduction,
};
pub use oracle::{grid_search, refined_search};
pub use scalar::Real;

pub type UserLinkF64 = model::UserLink<f64>;
pub type UserLinkF32 = model::UserLink<f32>;
pub type ScenarioF64 = model::Scenario<f64>;
pub type ScenarioF32 = model::Scenario<f32>;
pub type PowerAllocationF64 = model::PowerAllocation<f64>;
pub type PowerAllocationF32 = model::PowerAllocation<f32>;
pub type DemandF64 = model::Demand<f64>;
pub type DemandF32 = model::Demand<f32>;
pub type ThresholdsF64 = allocator::Thresholds<f64>;
pub type ThresholdsF32 = allocator::Thresholds<f32>;
pub type SolverOutcomeF64 = allocator::SolverOutcome<f64>;
pub type SolverOutcomeF32 = allocator::SolverOutcome<f32>;
pub type OracleResultF64 = oracle::OracleResult<f64>;
pub type OracleResultF32 = oracle::OracleResult<f32>;
