//! Globally optimal energy-efficient power allocation for the two-user
//! multiple-access channel with a separate energy harvester.
//!
//! Below `chi_star` the leader (stronger decoder link) transmits at its
//! efficiency-maximising power and the follower stays silent. Between
//! `chi_star` and `chi_prime` the leader alone raises its power to meet the
//! demand exactly. Above `chi_prime` both users share the demand: with the
//! leader also dominating the harvesting link it runs at peak power and the
//! follower tops up; otherwise the split solves a coupled stationarity
//! condition. When the follower saturates, the residual demand returns to the
//! leader.

mod closed_form;
mod kkt;
mod problem;
mod thresholds;

pub use closed_form::{coupled_leader_power, unconstrained_optimum};
pub use kkt::{kkt_residuals, BoundState, KktReport};
pub use thresholds::{chi_prime, chi_star, thresholds, Thresholds};

use std::fmt;

use crate::error::{Error, Result};
use crate::lambert::solve_omega;
use crate::model::{
    efficiency_net, harvested_energy, sum_rate, Deduction, Demand, PowerAllocation, Scenario,
};
use crate::scalar::Real;
use problem::Normalized;

/// Which constraints shape the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Harvest constraint slack; efficiency-maximising powers.
    ConstraintInactive,
    /// Constraint binds and a single user transmits.
    SingleUserActive,
    /// Constraint binds and both users transmit below the follower's peak.
    BothUsersActive,
    /// Constraint binds with the follower at its peak power.
    PeakLimited,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ConstraintInactive => "constraint_inactive",
            Regime::SingleUserActive => "single_user_active",
            Regime::BothUsersActive => "both_users_active",
            Regime::PeakLimited => "peak_limited",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOutcome<T = f64> {
    /// Raw demand the outcome was computed for.
    pub chi: T,
    pub alloc: PowerAllocation<T>,
    /// Demand-deducted net efficiency at `alloc`, bits/Joule.
    pub eta: T,
    pub rate: T,
    pub harvested: T,
    pub regime: Regime,
    pub thresholds: Thresholds<T>,
    /// Multiplier of the harvest constraint `E_hv >= chi`; zero when slack.
    pub multiplier: T,
}

/// Optimal allocation for demand `chi`.
pub fn solve<T: Real>(s: &Scenario<T>, chi: T) -> Result<SolverOutcome<T>> {
    let th = thresholds(s)?;
    solve_with(s, chi, &th)
}

/// Same as [`solve`] with thresholds computed once up front.
pub fn solve_with<T: Real>(
    s: &Scenario<T>,
    chi: T,
    th: &Thresholds<T>,
) -> Result<SolverOutcome<T>> {
    let demand = Demand::new(chi)?;
    let chi_max = s.chi_max();
    if chi > chi_max + T::HARVEST_SLACK * chi_max.max(T::one()) {
        return Err(Error::Infeasible {
            chi: chi.as_f64(),
            chi_max: chi_max.as_f64(),
        });
    }

    let n = Normalized::new(s, chi);
    let worst_net = s.block_t() * n.min_net_power();
    if worst_net <= T::DENOM_GUARD {
        return Err(Error::DenominatorNonpositive {
            value: worst_net.as_f64(),
        });
    }

    let (p, active) = n.optimum();
    let p = [0, 1].map(|m| p[m].max(T::zero()).min(n.p_max[m]));
    let alloc = PowerAllocation { p };
    let eta = efficiency_net(&alloc, s, &demand, Deduction::Demand)?;
    let rate = sum_rate(&alloc, s)?;
    let harvested = harvested_energy(&alloc, s)?;

    let (i, j) = (n.leader, n.follower());
    let regime = if !active {
        Regime::ConstraintInactive
    } else if p[i] > T::zero() && p[j] > T::zero() {
        if p[j] >= n.p_max[j] {
            Regime::PeakLimited
        } else {
            Regime::BothUsersActive
        }
    } else {
        Regime::SingleUserActive
    };
    let multiplier = if active {
        multiplier(&n, p) / s.block_t()
    } else {
        T::zero()
    };

    Ok(SolverOutcome {
        chi,
        alloc,
        eta,
        rate,
        harvested,
        regime,
        thresholds: *th,
        multiplier,
    })
}

/// Multiplier of the per-unit-time constraint `g.p >= c` from stationarity
/// `d eta / d p_m + mu g_m = 0` of an interior user, else the smallest value
/// keeping users at their peak optimal.
fn multiplier<T: Real>(n: &Normalized<T>, p: [T; 2]) -> T {
    let grad = n.gradient(p);
    let interior = |m: usize| p[m] > T::zero() && p[m] < n.p_max[m] && n.g[m] > T::zero();
    let mu = if interior(n.leader) {
        -grad[n.leader] / n.g[n.leader]
    } else if interior(n.follower()) {
        -grad[n.follower()] / n.g[n.follower()]
    } else {
        (0..2)
            .filter(|&m| p[m] >= n.p_max[m] && n.p_max[m] > T::zero() && n.g[m] > T::zero())
            .map(|m| -grad[m] / n.g[m])
            .fold(T::zero(), T::max)
    };
    mu.max(T::zero())
}

/// Optimal net efficiency as a function of demand, piecewise in `chi`.
///
/// Below `chi_star`: `h_i log2(w) / (Gamma + w)` with
/// `Gamma = h_i (P_c - chi) - 1` and `w = e^{W(Gamma/e)+1}`. Above it, with
/// the constraint tight, `log2(1 + (h_i - a_j g_i) P_i + a_j chi)
/// / (P_c + (1 - g_i / g_j) P_i + b_j chi)` where `a_j = h_j / g_j`,
/// `b_j = 1 / g_j - 1` and `P_i` is the optimal leader power. Clamped cases
/// the two branches do not cover fall back to evaluating the allocation.
pub fn optimal_efficiency<T: Real>(s: &Scenario<T>, chi: T) -> Result<T> {
    let out = solve(s, chi)?;
    let n = Normalized::new(s, chi);
    let (i, j) = (n.leader, n.follower());
    let p = out.alloc.p;
    match out.regime {
        Regime::ConstraintInactive
            if p[j] == T::zero() && p[i] < n.p_max[i] && n.h[i] > T::zero() =>
        {
            let gamma = n.h[i] * n.k - T::one();
            let omega = solve_omega(gamma)?;
            Ok(n.h[i] * omega.log2() / (gamma + omega))
        }
        Regime::ConstraintInactive => Ok(out.eta),
        _ if n.g[j] > T::zero() => {
            let a_j = n.h[j] / n.g[j];
            let numerator = T::one() + (n.h[i] - a_j * n.g[i]) * p[i] + a_j * n.c;
            let denominator = n.k + (T::one() - n.g[i] / n.g[j]) * p[i] + n.c / n.g[j];
            Ok(numerator.log2() / denominator)
        }
        _ => Ok(out.eta),
    }
}
