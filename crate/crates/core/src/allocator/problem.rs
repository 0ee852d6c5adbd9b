//! The allocation problem in per-unit-time form.
//!
//! Dividing rate and energies by the block duration turns the problem into
//! `max log2(1 + h.p) / (k + p_0 + p_1)` subject to `g.p >= c` and the power
//! box, where `k = P_c - chi / T` and `c = max(0, chi - sigma_H^2) / T`.

use super::closed_form::{coupled_leader_power, maximize_log_ratio};
use crate::lambert::solve_omega;
use crate::model::Scenario;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Normalized<T> {
    pub h: [T; 2],
    pub g: [T; 2],
    pub p_max: [T; 2],
    /// Offset of the net-power denominator, `P_c - chi / T`.
    pub k: T,
    /// Harvest requirement per unit time.
    pub c: T,
    pub leader: usize,
}

/// Index of the user with the stronger link to the decoder; near-ties go to
/// the lower index.
pub(crate) fn leader_index<T: Real>(h: [T; 2]) -> usize {
    if h[1] > h[0] + T::TIE_TOL {
        1
    } else {
        0
    }
}

impl<T: Real> Normalized<T> {
    pub fn new(s: &Scenario<T>, chi: T) -> Self {
        let t = s.block_t();
        let g = s.g();
        let p_max = s.p_max();
        let c_max = g[0] * p_max[0] + g[1] * p_max[1];
        let c = ((chi - s.sigma_h_sq()).max(T::zero()) / t).min(c_max);
        Normalized {
            h: s.h(),
            g,
            p_max,
            k: s.circuit_power() - chi / t,
            c,
            leader: leader_index(s.h()),
        }
    }

    pub fn follower(&self) -> usize {
        1 - self.leader
    }

    pub fn harvest(&self, p: [T; 2]) -> T {
        self.g[0] * p[0] + self.g[1] * p[1]
    }

    pub fn gradient(&self, p: [T; 2]) -> [T; 2] {
        let w = T::one() + self.h[0] * p[0] + self.h[1] * p[1];
        let d = self.k + p[0] + p[1];
        let eta = w.log2() / d;
        [0, 1].map(|m| self.h[m] / (T::LN_2() * w * d) - eta / d)
    }

    /// Smallest net power over the feasible set: greedy fill of the demand by
    /// harvesting gain.
    pub fn min_net_power(&self) -> T {
        let mut order = [0usize, 1];
        if self.g[1] > self.g[0] {
            order = [1, 0];
        }
        let mut remaining = self.c;
        let mut total = T::zero();
        for m in order {
            if remaining <= T::zero() || self.g[m] <= T::zero() {
                break;
            }
            let p = (remaining / self.g[m]).min(self.p_max[m]);
            total += p;
            remaining -= self.g[m] * p;
        }
        self.k + total
    }

    /// Maximiser over the power box with the harvest constraint dropped.
    ///
    /// `None` when no stationary point exists (`h_i k - 1 < -1`): the
    /// objective is then unbounded near the origin and the constraint must bind.
    pub fn box_optimum(&self) -> Option<[T; 2]> {
        let (i, j) = (self.leader, self.follower());
        let mut p = [T::zero(); 2];
        if self.h[i] == T::zero() {
            return (self.k > T::zero()).then_some(p);
        }
        let gamma = self.h[i] * self.k - T::one();
        let omega = solve_omega(gamma).ok()?;
        let lead = ((omega - T::one()) / self.h[i]).max(T::zero());
        if lead <= self.p_max[i] {
            p[i] = lead;
            return Some(p);
        }
        // Leader saturates; the follower tops up along the edge p_i = p_max_i.
        p[i] = self.p_max[i];
        p[j] = maximize_log_ratio(
            T::one() + self.h[i] * self.p_max[i],
            self.h[j],
            self.k + self.p_max[i],
            T::one(),
            T::zero(),
            self.p_max[j],
        );
        Some(p)
    }

    /// Maximiser over the segment where the harvest constraint holds with
    /// equality.
    pub fn constrained_optimum(&self) -> [T; 2] {
        let (i, j) = (self.leader, self.follower());
        let (h, g, p_max, c, k) = (self.h, self.g, self.p_max, self.c, self.k);
        let mut p = [T::zero(); 2];

        if g[i] > T::zero() && g[j] > T::zero() {
            let hi = p_max[i].min(c / g[i]);
            let lo = ((c - g[j] * p_max[j]) / g[i]).max(T::zero()).min(hi);
            let a_j = h[j] / g[j];
            let beta = h[i] - a_j * g[i];
            let lead = if g[j] - g[i] > T::TIE_TOL && beta > T::zero() {
                // Follower harvests better: interior split from the coupled
                // stationarity condition.
                match coupled_leader_power([h[i], h[j]], [g[i], g[j]], k, c) {
                    Some(t) => t.max(lo).min(hi),
                    None => lo,
                }
            } else {
                maximize_log_ratio(
                    T::one() + a_j * c,
                    beta,
                    k + c / g[j],
                    T::one() - g[i] / g[j],
                    lo,
                    hi,
                )
            };
            p[i] = lead;
            p[j] = if lead >= hi && hi < p_max[i] {
                T::zero()
            } else if lead <= lo && lo > T::zero() {
                p_max[j]
            } else {
                ((c - g[i] * lead) / g[j]).max(T::zero()).min(p_max[j])
            };
        } else if g[j] > T::zero() {
            // Leader cannot harvest: the follower carries the demand alone.
            p[j] = (c / g[j]).min(p_max[j]);
            p[i] = maximize_log_ratio(
                T::one() + h[j] * p[j],
                h[i],
                k + p[j],
                T::one(),
                T::zero(),
                p_max[i],
            );
        } else {
            p[i] = (c / g[i]).min(p_max[i]);
            p[j] = maximize_log_ratio(
                T::one() + h[i] * p[i],
                h[j],
                k + p[i],
                T::one(),
                T::zero(),
                p_max[j],
            );
        }
        p
    }

    /// Optimal allocation and whether the harvest constraint binds.
    pub fn optimum(&self) -> ([T; 2], bool) {
        match self.box_optimum() {
            Some(p) if self.harvest(p) >= self.c => (p, false),
            _ => (self.constrained_optimum(), true),
        }
    }
}
