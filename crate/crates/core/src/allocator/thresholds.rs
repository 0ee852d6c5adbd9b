use super::problem::Normalized;
use crate::error::Result;
use crate::lambert::solve_omega;
use crate::model::Scenario;
use crate::roots::bisect;
use crate::scalar::Real;

/// Demand levels (raw Joules) that split the demand axis into regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds<T = f64> {
    /// Demand at which the harvest constraint starts to bind.
    pub chi_star: T,
    /// Largest demand the leader serves on its own.
    pub chi_prime: T,
    /// Largest feasible demand.
    pub chi_max: T,
    /// Index of the leader (stronger decoder link).
    pub leader: usize,
    /// Equal harvesting gains, or no sign change where one was expected.
    pub degenerate: bool,
    /// The constraint binds already at zero demand.
    pub active_from_zero: bool,
}

/// Computes `chi_star`, `chi_prime` and `chi_max` for a scenario.
pub fn thresholds<T: Real>(s: &Scenario<T>) -> Result<Thresholds<T>> {
    let chi_max = s.chi_max();
    let (chi_star, active_from_zero) = chi_star_flagged(s);
    let (chi_prime, degenerate) = chi_prime_from(s, chi_star);
    Ok(Thresholds {
        chi_star,
        chi_prime,
        chi_max,
        leader: Normalized::new(s, T::zero()).leader,
        degenerate,
        active_from_zero,
    })
}

/// Demand at which the efficiency-maximising allocation stops covering the
/// demand on its own.
///
/// Root of `E_hv(p_box(chi)) - chi`, where `p_box(chi)` is the box optimum with
/// the constraint dropped. For an unclamped leader this is
/// `W((h_i (P_c - chi) - 1) / e) + 1 = ln(1 + h_i chi / g_i)`.
pub fn chi_star<T: Real>(s: &Scenario<T>) -> T {
    chi_star_flagged(s).0
}

fn chi_star_flagged<T: Real>(s: &Scenario<T>) -> (T, bool) {
    let chi_max = s.chi_max();
    let surplus = |chi: T| {
        let n = Normalized::new(s, chi);
        let p = n.box_optimum().unwrap_or([T::zero(); 2]);
        s.block_t() * n.harvest(p) + s.sigma_h_sq() - chi
    };
    if surplus(T::zero()) <= T::zero() {
        return (T::zero(), true);
    }
    if surplus(chi_max) >= T::zero() {
        return (chi_max, false);
    }
    // Sign change is guaranteed by the two checks above. Zero tolerance runs
    // the bracket down to adjacent floating point numbers.
    let root = bisect(surplus, T::zero(), chi_max, T::zero()).unwrap_or(chi_max);
    (root, false)
}

/// Largest demand served by the leader alone (follower silent).
pub fn chi_prime<T: Real>(s: &Scenario<T>) -> T {
    chi_prime_from(s, chi_star(s)).0
}

fn chi_prime_from<T: Real>(s: &Scenario<T>, chi_star: T) -> (T, bool) {
    let n0 = Normalized::new(s, T::zero());
    let (i, j) = (n0.leader, n0.follower());
    let (h, g, p_max) = (n0.h, n0.g, n0.p_max);
    let t = s.block_t();
    let chi_max = s.chi_max();
    let lead_max = t * g[i] * p_max[i] + s.sigma_h_sq();
    let upper = lead_max.min(chi_max);
    let clamp = |x: T| x.max(chi_star).min(chi_max);

    if g[i] <= T::zero() || p_max[i] <= T::zero() || upper <= chi_star {
        return (chi_star, false);
    }
    if p_max[j] <= T::zero() {
        return (clamp(lead_max), false);
    }
    if (g[i] - g[j]).abs() <= T::TIE_TOL {
        // Equal harvesting gains: the net power is the same for any split,
        // so the leader serves first.
        return (clamp(lead_max), true);
    }
    let beta = if g[j] > T::zero() {
        h[i] - h[j] * g[i] / g[j]
    } else {
        T::infinity()
    };
    if g[i] > g[j] && beta >= T::zero() {
        // Leader dominates on both links: it serves alone up to its peak.
        return (clamp(lead_max), false);
    }

    let coupled = g[j] > g[i] && beta > T::zero();
    // Positive when the follower should already be transmitting.
    let follower_pull = |chi: T| {
        let n = Normalized::new(s, chi);
        let lead = n.c / g[i];
        if coupled {
            // ln(1 + h_i chi / g_i) - (W(A/e) + 1)
            let a_ij = (h[i] * g[j] - h[j] * g[i]) / (g[j] - g[i]);
            let big_a = a_ij * (n.k + n.c / g[j]) - T::one() - n.c * h[j] / g[j];
            let ln_z = solve_omega(big_a).map(|z| z.ln()).unwrap_or(T::zero());
            (T::one() + h[i] * lead).ln() - ln_z
        } else {
            let mut p = [T::zero(); 2];
            p[i] = lead;
            let grad = n.gradient(p);
            g[i] * grad[j] - g[j] * grad[i]
        }
    };

    let at_upper = follower_pull(upper);
    if at_upper <= T::zero() {
        return (clamp(upper), false);
    }
    if follower_pull(chi_star) > T::zero() {
        return (clamp(lead_max), true);
    }
    match bisect(follower_pull, chi_star, upper, T::zero()) {
        Ok(root) => (clamp(root), false),
        Err(_) => (clamp(lead_max), true),
    }
}
