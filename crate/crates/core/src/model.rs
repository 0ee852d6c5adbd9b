//! System model: user links, scenarios, allocations and the rate / energy /
//! efficiency formulas every other module is built on.
//!
//! Energies are in Joules, powers in Watts and rates in bits per channel use
//! over a block of `block_t` seconds. Receiver noise at the information
//! decoder is normalised to unit variance, so `h` and `g` are normalised
//! channel power gains.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One transmitter and its two links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink<T = f64> {
    /// Channel power gain towards the information-decoding receiver.
    pub h: T,
    /// Channel power gain towards the energy-harvesting receiver.
    pub g: T,
    /// Peak transmit power in Watts. Zero disables the user.
    pub p_max: T,
    /// Circuit power consumption in Watts.
    pub p_circuit: T,
}

impl<T: Real> UserLink<T> {
    pub fn new(h: T, g: T, p_max: T, p_circuit: T) -> Result<Self> {
        let link = UserLink {
            h,
            g,
            p_max,
            p_circuit,
        };
        link.validate("")?;
        Ok(link)
    }

    fn validate(&self, prefix: &str) -> Result<()> {
        check_nonneg(&format!("{prefix}h"), self.h)?;
        check_nonneg(&format!("{prefix}g"), self.g)?;
        check_nonneg(&format!("{prefix}p_max"), self.p_max)?;
        check_nonneg(&format!("{prefix}p_circuit"), self.p_circuit)
    }
}

fn check_nonneg<T: Real>(field: &str, value: T) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(field, "must be finite"));
    }
    if value < T::zero() {
        return Err(Error::invalid(field, format!("must be >= 0, got {value}")));
    }
    Ok(())
}

/// A complete two-user problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T = f64> {
    users: [UserLink<T>; 2],
    sigma_h_sq: T,
    block_t: T,
}

impl<T: Real> Scenario<T> {
    /// Builds a scenario with explicit harvester noise and block duration.
    pub fn new(users: [UserLink<T>; 2], sigma_h_sq: T, block_t: T) -> Result<Self> {
        for (i, user) in users.iter().enumerate() {
            user.validate(&format!("user{}.", i + 1))?;
        }
        check_nonneg("sigma_h_sq", sigma_h_sq)?;
        if !block_t.is_finite() || block_t <= T::zero() {
            return Err(Error::invalid(
                "block_t",
                format!("must be finite and > 0, got {block_t}"),
            ));
        }
        Ok(Scenario {
            users,
            sigma_h_sq,
            block_t,
        })
    }

    /// Scenario with no harvester noise and a unit block.
    pub fn with_defaults(users: [UserLink<T>; 2]) -> Result<Self> {
        Self::new(users, T::zero(), T::one())
    }

    pub fn users(&self) -> &[UserLink<T>; 2] {
        &self.users
    }

    pub fn user(&self, index: usize) -> &UserLink<T> {
        &self.users[index]
    }

    pub fn sigma_h_sq(&self) -> T {
        self.sigma_h_sq
    }

    pub fn block_t(&self) -> T {
        self.block_t
    }

    /// Total circuit power `P_c`.
    pub fn circuit_power(&self) -> T {
        self.users[0].p_circuit + self.users[1].p_circuit
    }

    pub fn h(&self) -> [T; 2] {
        [self.users[0].h, self.users[1].h]
    }

    pub fn g(&self) -> [T; 2] {
        [self.users[0].g, self.users[1].g]
    }

    pub fn p_max(&self) -> [T; 2] {
        [self.users[0].p_max, self.users[1].p_max]
    }

    /// Energy harvested when both users transmit at peak power.
    pub fn chi_max(&self) -> T {
        let g = self.g();
        let p = self.p_max();
        self.block_t * (g[0] * p[0] + g[1] * p[1]) + self.sigma_h_sq
    }

    /// Copy with one user's link replaced.
    pub fn with_user(&self, index: usize, link: UserLink<T>) -> Result<Self> {
        let mut users = self.users;
        users[index] = link;
        Self::new(users, self.sigma_h_sq, self.block_t)
    }

    /// Copy with the total circuit power split evenly across the two users.
    pub fn with_circuit_power(&self, total: T) -> Result<Self> {
        let half = total / T::lit(2.0);
        let mut users = self.users;
        users[0].p_circuit = half;
        users[1].p_circuit = half;
        Self::new(users, self.sigma_h_sq, self.block_t).map_err(|_| {
            Error::invalid(
                "p_circuit",
                format!("total circuit power must be finite and >= 0, got {total}"),
            )
        })
    }
}

/// Transmit powers of the two users in Watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation<T = f64> {
    pub p: [T; 2],
}

impl<T: Real> PowerAllocation<T> {
    pub fn new(p0: T, p1: T) -> Self {
        PowerAllocation { p: [p0, p1] }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn total(&self) -> T {
        self.p[0] + self.p[1]
    }

    /// Checks `0 <= p[i] <= p_max[i]` and finiteness.
    pub fn check(&self, s: &Scenario<T>) -> Result<()> {
        for (i, (&p, user)) in self.p.iter().zip(s.users()).enumerate() {
            if !p.is_finite() || p < T::zero() {
                return Err(Error::InvalidAllocation(format!(
                    "power of user {} must be finite and >= 0, got {p}",
                    i + 1
                )));
            }
            if p > user.p_max {
                return Err(Error::InvalidAllocation(format!(
                    "power of user {} is {p} W, above its peak {} W",
                    i + 1,
                    user.p_max
                )));
            }
        }
        Ok(())
    }
}

/// Required harvested energy `chi` in Joules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand<T = f64> {
    chi: T,
}

impl<T: Real> Demand<T> {
    pub fn new(chi: T) -> Result<Self> {
        check_nonneg("chi", chi)?;
        Ok(Demand { chi })
    }

    pub fn chi(&self) -> T {
        self.chi
    }

    /// Demand left after the harvester noise floor: `max(0, chi - sigma_H^2)`.
    pub fn effective(&self, s: &Scenario<T>) -> T {
        (self.chi - s.sigma_h_sq()).max(T::zero())
    }
}

/// What is deducted from the consumed energy in the net efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deduction {
    /// Deduct the demand `chi` (the harvester takes only what it needs).
    Demand,
    /// Deduct everything the harvester actually collects.
    Harvest,
}

/// Sum-rate capacity `T log2(1 + sum h_i p_i)`.
pub fn sum_rate<T: Real>(alloc: &PowerAllocation<T>, s: &Scenario<T>) -> Result<T> {
    alloc.check(s)?;
    Ok(s.block_t() * snr_sum(alloc, s).log2())
}

/// Energy spent over the block, `T (P_c + sum p_i)`.
pub fn total_energy<T: Real>(alloc: &PowerAllocation<T>, s: &Scenario<T>) -> Result<T> {
    alloc.check(s)?;
    Ok(s.block_t() * (s.circuit_power() + alloc.total()))
}

/// Energy collected by the harvester, `T sum g_i p_i + sigma_H^2`.
pub fn harvested_energy<T: Real>(alloc: &PowerAllocation<T>, s: &Scenario<T>) -> Result<T> {
    alloc.check(s)?;
    let g = s.g();
    Ok(s.block_t() * (g[0] * alloc.p[0] + g[1] * alloc.p[1]) + s.sigma_h_sq())
}

/// Rate per consumed energy, ignoring harvesting.
pub fn efficiency_baseline<T: Real>(alloc: &PowerAllocation<T>, s: &Scenario<T>) -> Result<T> {
    let energy = total_energy(alloc, s)?;
    if energy <= T::zero() {
        return Err(Error::ZeroConsumption);
    }
    Ok(sum_rate(alloc, s)? / energy)
}

/// Rate per net consumed energy, after deducting either the demand or the
/// harvested energy.
pub fn efficiency_net<T: Real>(
    alloc: &PowerAllocation<T>,
    s: &Scenario<T>,
    demand: &Demand<T>,
    mode: Deduction,
) -> Result<T> {
    let deducted = match mode {
        Deduction::Demand => demand.chi(),
        Deduction::Harvest => harvested_energy(alloc, s)?,
    };
    let denominator = total_energy(alloc, s)? - deducted;
    if denominator <= T::DENOM_GUARD {
        return Err(Error::DenominatorNonpositive {
            value: denominator.as_f64(),
        });
    }
    Ok(sum_rate(alloc, s)? / denominator)
}

/// Gradient of the demand-deducted net efficiency with respect to the two
/// transmit powers.
///
/// With `w = 1 + sum h_k p_k` and `D = T (P_c + sum p_k) - chi`:
/// `d eta / d p_k = T h_k / (ln2 w D) - T eta / D`.
pub fn efficiency_gradient<T: Real>(
    alloc: &PowerAllocation<T>,
    s: &Scenario<T>,
    demand: &Demand<T>,
) -> Result<[T; 2]> {
    let eta = efficiency_net(alloc, s, demand, Deduction::Demand)?;
    let t = s.block_t();
    let w = snr_sum(alloc, s);
    let denominator = total_energy(alloc, s)? - demand.chi();
    let h = s.h();
    let common = t * eta / denominator;
    Ok([0, 1].map(|k| t * h[k] / (T::LN_2() * w * denominator) - common))
}

fn snr_sum<T: Real>(alloc: &PowerAllocation<T>, s: &Scenario<T>) -> T {
    let h = s.h();
    T::one() + h[0] * alloc.p[0] + h[1] * alloc.p[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(h: [f64; 2], g: [f64; 2], p_circuit: [f64; 2], sigma: f64, t: f64) -> Scenario {
        let users = [0, 1].map(|i| UserLink::new(h[i], g[i], 2.0, p_circuit[i]).unwrap());
        Scenario::new(users, sigma, t).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sum_rate_examples() {
        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.3, 0.3], 0.0, 1.0);
        assert_eq!(sum_rate(&PowerAllocation::zero(), &s).unwrap(), 0.0);
        let r = sum_rate(&PowerAllocation::new(1.0, 1.0), &s).unwrap();
        assert!(close(r, 2.2f64.log2(), 1e-15));
        assert!(close(r, 1.137504, 1e-6));
        let r = sum_rate(&PowerAllocation::new(2.0, 0.0), &s).unwrap();
        assert!(close(r, 1.378512, 1e-6));
    }

    #[test]
    fn total_energy_examples() {
        let s = scenario([1.0, 1.0], [0.5, 0.3], [0.0, 0.0], 0.0, 1.0);
        assert_eq!(total_energy(&PowerAllocation::zero(), &s).unwrap(), 0.0);
        let s = scenario([1.0, 1.0], [0.5, 0.3], [0.3, 0.3], 0.0, 1.0);
        assert!(close(
            total_energy(&PowerAllocation::new(1.0, 2.0), &s).unwrap(),
            3.6,
            1e-15
        ));
        let s = scenario([1.0, 1.0], [0.5, 0.3], [0.3, 0.3], 0.0, 2.0);
        assert!(close(
            total_energy(&PowerAllocation::new(1.0, 2.0), &s).unwrap(),
            7.2,
            1e-14
        ));
    }

    #[test]
    fn harvested_energy_examples() {
        let s = scenario([1.0, 1.0], [0.5, 0.3], [0.3, 0.3], 0.0, 1.0);
        assert!(close(
            harvested_energy(&PowerAllocation::new(1.0, 2.0), &s).unwrap(),
            1.1,
            1e-15
        ));
        let s = scenario([1.0, 1.0], [0.5, 0.3], [0.3, 0.3], 0.01, 1.0);
        assert_eq!(
            harvested_energy(&PowerAllocation::zero(), &s).unwrap(),
            0.01
        );
        let s = scenario([1.0, 1.0], [0.5, 0.8], [0.3, 0.3], 0.0, 1.0);
        let e = harvested_energy(&PowerAllocation::new(2.0, 2.0), &s).unwrap();
        assert!(close(e, 2.6, 1e-15));
        assert_eq!(e, s.chi_max());
    }

    #[test]
    fn baseline_efficiency_examples() {
        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.5, 0.5], 0.0, 1.0);
        assert_eq!(
            efficiency_baseline(&PowerAllocation::zero(), &s).unwrap(),
            0.0
        );

        let s = scenario([1.0, 0.0], [0.5, 0.3], [0.5, 0.5], 0.0, 1.0);
        let e1 = std::f64::consts::E - 1.0;
        let eta = efficiency_baseline(&PowerAllocation::new(e1, 0.0), &s).unwrap();
        assert!(close(
            eta,
            std::f64::consts::LOG2_E / std::f64::consts::E,
            1e-15
        ));
        assert!(close(eta, 0.530738, 1e-6));

        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.3, 0.3], 0.0, 1.0);
        let eta = efficiency_baseline(&PowerAllocation::new(1.0, 1.0), &s).unwrap();
        assert!(close(eta, 0.437502, 1e-6));

        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.0, 0.0], 0.0, 1.0);
        assert_eq!(
            efficiency_baseline(&PowerAllocation::zero(), &s),
            Err(Error::ZeroConsumption)
        );
    }

    #[test]
    fn net_efficiency_examples() {
        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.3, 0.3], 0.0, 1.0);
        let p = PowerAllocation::new(1.0, 1.0);
        let zero = Demand::new(0.0).unwrap();
        let base = efficiency_baseline(&p, &s).unwrap();
        assert_eq!(
            efficiency_net(&p, &s, &zero, Deduction::Demand).unwrap(),
            base
        );

        let d = Demand::new(0.5).unwrap();
        let by_demand = efficiency_net(&p, &s, &d, Deduction::Demand).unwrap();
        assert!(close(by_demand, 2.2f64.log2() / 2.1, 1e-15));
        assert!(close(by_demand, 0.541669, 1e-6));
        let by_harvest = efficiency_net(&p, &s, &d, Deduction::Harvest).unwrap();
        assert!(close(by_harvest, 0.631947, 1e-6));
    }

    #[test]
    fn harvest_deduction_with_zero_demand_and_noise_free_harvester_matches_baseline() {
        let s = scenario([0.8, 0.4], [0.0, 0.0], [0.3, 0.3], 0.0, 1.0);
        let p = PowerAllocation::new(1.0, 0.5);
        let zero = Demand::new(0.0).unwrap();
        let base = efficiency_baseline(&p, &s).unwrap();
        assert_eq!(
            efficiency_net(&p, &s, &zero, Deduction::Harvest).unwrap(),
            base
        );
    }

    #[test]
    fn nonpositive_denominator_is_rejected() {
        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.3, 0.3], 0.0, 1.0);
        let p = PowerAllocation::new(1.0, 1.0);
        let d = Demand::new(2.6).unwrap();
        assert!(matches!(
            efficiency_net(&p, &s, &d, Deduction::Demand),
            Err(Error::DenominatorNonpositive { .. })
        ));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(UserLink::new(f64::NAN, 0.5, 1.0, 0.1).is_err());
        assert!(UserLink::new(0.5, -0.1, 1.0, 0.1).is_err());
        assert!(UserLink::new(0.5, 0.1, f64::INFINITY, 0.1).is_err());
        assert!(Demand::new(-1.0).is_err());
        let link = UserLink::new(0.5, 0.5, 1.0, 0.1).unwrap();
        assert!(Scenario::new([link, link], 0.0, 0.0).is_err());
        assert!(Scenario::new([link, link], -1.0, 1.0).is_err());
        let s = Scenario::with_defaults([link, link]).unwrap();
        assert!(sum_rate(&PowerAllocation::new(-0.1, 0.0), &s).is_err());
        assert!(sum_rate(&PowerAllocation::new(f64::NAN, 0.0), &s).is_err());
        assert!(sum_rate(&PowerAllocation::new(1.5, 0.0), &s).is_err());
    }

    #[test]
    fn effective_demand_subtracts_noise_floor() {
        let s = scenario([0.8, 0.4], [0.5, 0.3], [0.3, 0.3], 0.2, 1.0);
        assert!(close(Demand::new(0.5).unwrap().effective(&s), 0.3, 1e-15));
        assert_eq!(Demand::new(0.1).unwrap().effective(&s), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = scenario([0.8, 0.4], [0.5, 0.8], [0.3, 0.3], 0.0, 1.5);
        let d = Demand::new(0.4).unwrap();
        let p = PowerAllocation::new(0.7, 1.1);
        let grad = efficiency_gradient(&p, &s, &d).unwrap();
        let step = 1e-6;
        for (k, &cf) in grad.iter().enumerate() {
            let mut plus = p;
            let mut minus = p;
            plus.p[k] += step;
            minus.p[k] -= step;
            let fd = (efficiency_net(&plus, &s, &d, Deduction::Demand).unwrap()
                - efficiency_net(&minus, &s, &d, Deduction::Demand).unwrap())
                / (2.0 * step);
            assert!(close(fd, cf, 1e-8), "k={k} fd={fd} cf={cf}");
        }
    }

    #[test]
    fn single_precision_formulas() {
        let users = [
            UserLink::new(0.8f32, 0.5, 2.0, 0.3).unwrap(),
            UserLink::new(0.4f32, 0.3, 2.0, 0.3).unwrap(),
        ];
        let s = Scenario::with_defaults(users).unwrap();
        let r = sum_rate(&PowerAllocation::new(1.0f32, 1.0), &s).unwrap();
        assert!((r - 1.137504).abs() < 1e-5);
    }
}
