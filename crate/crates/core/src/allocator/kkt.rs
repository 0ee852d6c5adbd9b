use super::SolverOutcome;
use crate::error::Result;
use crate::model::{efficiency_gradient, Demand, Scenario};
use crate::scalar::Real;

/// Position of a power relative to its box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundState {
    Lower,
    Interior,
    Upper,
    /// `p_max = 0`: the power is pinned.
    Fixed,
}

/// First-order optimality diagnostics for an allocation.
///
/// `residual[m] = d eta / d p_m + mu dE_hv / d p_m`. It must vanish for an
/// interior user, be `<= 0` at the lower bound and `>= 0` at the upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport<T = f64> {
    pub gradient: [T; 2],
    pub state: [BoundState; 2],
    pub residual: [T; 2],
    pub multiplier: T,
    /// `mu (E_hv - chi)`.
    pub complementary_slackness: T,
}

impl<T: Real> KktReport<T> {
    /// Largest stationarity violation over interior users.
    pub fn stationarity(&self) -> T {
        (0..2)
            .filter(|&m| self.state[m] == BoundState::Interior)
            .map(|m| self.residual[m].abs())
            .fold(T::zero(), T::max)
    }

    /// Smallest signed slack over users at a bound; negative values mean the
    /// bound is not optimal.
    pub fn bound_slack(&self) -> T {
        (0..2)
            .filter_map(|m| match self.state[m] {
                BoundState::Lower => Some(-self.residual[m]),
                BoundState::Upper => Some(self.residual[m]),
                _ => None,
            })
            .fold(T::infinity(), T::min)
    }

    pub fn satisfied(&self, tol: T) -> bool {
        self.stationarity() <= tol
            && self.bound_slack() >= -tol
            && self.multiplier >= T::zero()
            && self.complementary_slackness.abs() <= tol
    }
}

/// Evaluates the optimality conditions at a solver outcome.
pub fn kkt_residuals<T: Real>(
    s: &Scenario<T>,
    outcome: &SolverOutcome<T>,
    chi: T,
) -> Result<KktReport<T>> {
    let demand = Demand::new(chi)?;
    let gradient = efficiency_gradient(&outcome.alloc, s, &demand)?;
    let p = outcome.alloc.p;
    let p_max = s.p_max();
    let g = s.g();
    let mu = outcome.multiplier;
    let state = [0, 1].map(|m| {
        if p_max[m] <= T::zero() {
            BoundState::Fixed
        } else if p[m] <= T::zero() {
            BoundState::Lower
        } else if p[m] >= p_max[m] {
            BoundState::Upper
        } else {
            BoundState::Interior
        }
    });
    let residual = [0, 1].map(|m| gradient[m] + mu * s.block_t() * g[m]);
    Ok(KktReport {
        gradient,
        state,
        residual,
        multiplier: mu,
        complementary_slackness: mu * (outcome.harvested - chi),
    })
}
