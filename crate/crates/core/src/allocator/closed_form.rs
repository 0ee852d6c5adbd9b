//! Closed-form building blocks: every optimum in this problem is a maximiser of
//! `log2(a + b t) / (c + d t)` along some segment, and all of them come out of
//! the same Lambert W inversion.

use crate::error::{Error, Result};
use crate::lambert::solve_omega;
use crate::scalar::Real;

/// Optimal power of a user transmitting alone with the harvest constraint
/// slack: `min(p_max, (omega - 1) / h)` where `omega` solves
/// `omega ln omega - omega = h (P_c - chi) - 1`.
///
/// `p_max` may be infinite.
pub fn unconstrained_optimum<T: Real>(h: T, p_circuit: T, chi: T, p_max: T) -> Result<T> {
    if !h.is_finite() || h <= T::zero() {
        return Err(Error::invalid(
            "h",
            format!("must be finite and > 0, got {h}"),
        ));
    }
    if !p_circuit.is_finite() || p_circuit < T::zero() {
        return Err(Error::invalid(
            "p_circuit",
            format!("must be finite and >= 0, got {p_circuit}"),
        ));
    }
    if !chi.is_finite() || chi < T::zero() {
        return Err(Error::invalid(
            "chi",
            format!("must be finite and >= 0, got {chi}"),
        ));
    }
    if p_max.is_nan() || p_max < T::zero() {
        return Err(Error::invalid(
            "p_max",
            format!("must be >= 0, got {p_max}"),
        ));
    }
    let gamma = h * (p_circuit - chi) - T::one();
    let omega = solve_omega(gamma)?;
    Ok(((omega - T::one()) / h).max(T::zero()).min(p_max))
}

/// Leader power when both users share an active harvest constraint and the
/// follower has the stronger harvesting link (`g_j > g_i`).
///
/// `net_offset` is `P_c - chi / T` and `demand` the per-unit-time effective
/// demand. With `a_ij = (h_i g_j - h_j g_i) / (g_j - g_i)` and
/// `A = a_ij (net_offset + demand / g_j) - 1 - demand h_j / g_j`, the result is
/// `(g_j e^{W(A/e)+1} - g_j - h_j demand) / (g_j h_i - g_i h_j)`, unclamped.
/// Returns `None` when `A < -1`: efficiency then falls monotonically as power
/// moves to the leader.
pub fn coupled_leader_power<T: Real>(h: [T; 2], g: [T; 2], net_offset: T, demand: T) -> Option<T> {
    let [h_i, h_j] = h;
    let [g_i, g_j] = g;
    let a_ij = (h_i * g_j - h_j * g_i) / (g_j - g_i);
    let big_a = a_ij * (net_offset + demand / g_j) - T::one() - demand * h_j / g_j;
    let z = solve_omega(big_a).ok()?;
    Some((g_j * z - g_j - h_j * demand) / (g_j * h_i - g_i * h_j))
}

/// Maximises `ln(alpha + beta t) / (gamma + delta t)` over `t in [lo, hi]`.
///
/// The numerator argument must be `>= 1` and the denominator positive on the
/// whole interval. In `z = alpha + beta t` the objective is
/// `ln z / (u + v z)` with `v = delta / beta`; for `v > 0` it is unimodal with
/// its peak at `z ln z - z = u / v`, otherwise it increases with `z`.
pub(crate) fn maximize_log_ratio<T: Real>(
    alpha: T,
    beta: T,
    gamma: T,
    delta: T,
    lo: T,
    hi: T,
) -> T {
    if hi <= lo {
        return lo;
    }
    if beta == T::zero() {
        // Constant numerator: minimise the denominator.
        return if delta < T::zero() { hi } else { lo };
    }
    let z_at = |t: T| alpha + beta * t;
    // Endpoint reached when z is pushed to its largest / smallest value.
    let (t_zmax, t_zmin) = if beta > T::zero() { (hi, lo) } else { (lo, hi) };
    let v = delta / beta;
    if v <= T::zero() {
        return t_zmax;
    }
    let u = gamma - v * alpha;
    let target = u / v;
    if target < -T::one() {
        return t_zmin;
    }
    let z_star = match solve_omega(target) {
        Ok(z) => z,
        Err(_) => return t_zmin,
    };
    if z_star >= z_at(t_zmax).max(z_at(t_zmin)) {
        return t_zmax;
    }
    if z_star <= z_at(t_zmax).min(z_at(t_zmin)) {
        return t_zmin;
    }
    ((z_star - alpha) / beta).max(lo).min(hi)
}
