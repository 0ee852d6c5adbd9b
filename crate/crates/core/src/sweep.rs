//! Parameter sweeps over demand, transmit power and circuit power, random
//! scenario sampling, and the CSV format the sweeps are written in.

use std::io::{self, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::allocator::{solve_with, thresholds, Regime, SolverOutcome};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::model::{
    efficiency_net, harvested_energy, sum_rate, Deduction, Demand, PowerAllocation, Scenario,
    UserLink,
};
use crate::oracle::refined_search;
use crate::scalar::Real;

/// Identifier of the random generator written to sampled files and CSV
/// preambles.
pub const RNG_ALGORITHM: &str =
    "chacha20 (rand_chacha seed_from_u64), u = (next_u64 >> 11) * 2^-53, draw = -a ln(1 - u)";

/// Outcome class of one sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Infeasible,
    DenominatorNonpositive,
    DomainError,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Infeasible => "infeasible",
            RowStatus::DenominatorNonpositive => "denominator_nonpositive",
            RowStatus::DomainError => "domain_error",
        }
    }

    /// Maps per-row numerical failures to a status; anything else is a real
    /// error and is propagated.
    fn from_error(e: Error) -> Result<Self> {
        match e {
            Error::Infeasible { .. } | Error::InfeasibleEverywhere { .. } => {
                Ok(RowStatus::Infeasible)
            }
            Error::DenominatorNonpositive { .. } => Ok(RowStatus::DenominatorNonpositive),
            Error::Domain { .. } | Error::ConstraintForcedActive { .. } | Error::NoRoot { .. } => {
                Ok(RowStatus::DomainError)
            }
            other => Err(other),
        }
    }
}

/// One row of a sweep. Values are absent when the row failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord<T = f64> {
    pub chi: T,
    pub p: Option<[T; 2]>,
    pub eta: Option<T>,
    pub rate: Option<T>,
    pub harvested: Option<T>,
    pub regime: Option<Regime>,
    pub status: RowStatus,
    pub oracle_eta: Option<T>,
}

impl<T: Real> SweepRecord<T> {
    fn failed(chi: T, status: RowStatus) -> Self {
        SweepRecord {
            chi,
            p: None,
            eta: None,
            rate: None,
            harvested: None,
            regime: None,
            status,
            oracle_eta: None,
        }
    }

    fn from_outcome(out: &SolverOutcome<T>) -> Self {
        SweepRecord {
            chi: out.chi,
            p: Some(out.alloc.p),
            eta: Some(out.eta),
            rate: Some(out.rate),
            harvested: Some(out.harvested),
            regime: Some(out.regime),
            status: RowStatus::Ok,
            oracle_eta: None,
        }
    }
}

/// Resolution of the brute-force cross-check attached to sweep rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSettings {
    pub coarse_n: u64,
    pub refine_rounds: u32,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            coarse_n: 400,
            refine_rounds: 2,
        }
    }
}

/// Optimal allocation at every demand of an ascending grid. Infeasible demands
/// give marked rows instead of errors.
pub fn sweep_chi<T: Real>(
    s: &Scenario<T>,
    chi_grid: &[T],
    oracle: Option<OracleSettings>,
) -> Result<Vec<SweepRecord<T>>> {
    for &chi in chi_grid {
        Demand::new(chi)?;
    }
    if chi_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("chi_grid", "must be sorted ascending"));
    }
    let th = thresholds(s)?;
    chi_grid
        .par_iter()
        .map(|&chi| {
            let mut record = match solve_with(s, chi, &th) {
                Ok(out) => SweepRecord::from_outcome(&out),
                Err(e) => SweepRecord::failed(chi, RowStatus::from_error(e)?),
            };
            if let Some(settings) = oracle {
                record.oracle_eta =
                    match refined_search(s, chi, settings.coarse_n, settings.refine_rounds) {
                        Ok(r) => Some(r.eta),
                        Err(e) => {
                            RowStatus::from_error(e)?;
                            None
                        }
                    };
            }
            Ok(record)
        })
        .collect()
}

/// Net efficiency along one user's power with the other user silent, at
/// fixed demand. The regime column is left empty: the slice ignores the
/// harvest constraint.
pub fn sweep_power<T: Real>(
    s: &Scenario<T>,
    user: usize,
    p_grid: &[T],
    chi: T,
) -> Result<Vec<SweepRecord<T>>> {
    if user > 1 {
        return Err(Error::invalid(
            "user",
            format!("must be 0 or 1, got {user}"),
        ));
    }
    let demand = Demand::new(chi)?;
    p_grid
        .par_iter()
        .map(|&p| {
            let mut powers = [T::zero(); 2];
            powers[user] = p;
            let alloc = PowerAllocation { p: powers };
            alloc.check(s)?;
            match efficiency_net(&alloc, s, &demand, Deduction::Demand) {
                Ok(eta) => Ok(SweepRecord {
                    chi,
                    p: Some(powers),
                    eta: Some(eta),
                    rate: Some(sum_rate(&alloc, s)?),
                    harvested: Some(harvested_energy(&alloc, s)?),
                    regime: None,
                    status: RowStatus::Ok,
                    oracle_eta: None,
                }),
                Err(e) => {
                    let mut record = SweepRecord::failed(chi, RowStatus::from_error(e)?);
                    record.p = Some(powers);
                    Ok(record)
                }
            }
        })
        .collect()
}

/// Optimal allocation at fixed demand for each total circuit power, split
/// evenly between the users.
pub fn sweep_circuit_power<T: Real>(
    s: &Scenario<T>,
    pc_grid: &[T],
    chi: T,
) -> Result<Vec<SweepRecord<T>>> {
    Demand::new(chi)?;
    pc_grid
        .par_iter()
        .map(|&pc| {
            let scenario = s.with_circuit_power(pc)?;
            let th = thresholds(&scenario)?;
            match solve_with(&scenario, chi, &th) {
                Ok(out) => Ok(SweepRecord::from_outcome(&out)),
                Err(e) => Ok(SweepRecord::failed(chi, RowStatus::from_error(e)?)),
            }
        })
        .collect()
}

/// Independent exponential draws of a given mean from a seeded generator.
#[derive(Debug, Clone)]
pub struct ExponentialSampler {
    rng: ChaCha20Rng,
    mean: f64,
}

impl ExponentialSampler {
    pub fn new(seed: u64, mean: f64) -> Result<Self> {
        if !mean.is_finite() || mean <= 0.0 {
            return Err(Error::invalid(
                "mean_gain",
                format!("must be finite and > 0, got {mean}"),
            ));
        }
        Ok(ExponentialSampler {
            rng: ChaCha20Rng::seed_from_u64(seed),
            mean,
        })
    }

    pub fn draw(&mut self) -> f64 {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        -self.mean * (-u).ln_1p()
    }
}

/// Replaces the channel gains of `template` with exponential draws of mean
/// `a`, in the order user1.h, user1.g, user2.h, user2.g. Powers, noise and
/// block length are copied.
pub fn sample_scenario<T: Real>(seed: u64, a: T, template: &Scenario<T>) -> Result<Scenario<T>> {
    let mut sampler = ExponentialSampler::new(seed, a.as_f64())?;
    let mut users = *template.users();
    for user in users.iter_mut() {
        let h = T::lit(sampler.draw());
        let g = T::lit(sampler.draw());
        *user = UserLink {
            h,
            g,
            p_max: user.p_max,
            p_circuit: user.p_circuit,
        };
    }
    Scenario::new(users, template.sigma_h_sq(), template.block_t())
}

/// `#` preamble describing a scenario.
pub fn scenario_preamble<T: Real>(s: &Scenario<T>) -> Vec<String> {
    let mut lines = Vec::new();
    for (i, u) in s.users().iter().enumerate() {
        lines.push(format!(
            "user{} h={} g={} p_max={} p_circuit={}",
            i + 1,
            sig12(u.h.as_f64()),
            sig12(u.g.as_f64()),
            sig12(u.p_max.as_f64()),
            sig12(u.p_circuit.as_f64()),
        ));
    }
    lines.push(format!(
        "sigma_h_sq={} block_t={}",
        sig12(s.sigma_h_sq().as_f64()),
        sig12(s.block_t().as_f64())
    ));
    lines
}

pub fn csv_header(with_oracle: bool) -> &'static str {
    if with_oracle {
        "chi,p1,p2,eta,rate,harvested,regime,status,oracle_eta"
    } else {
        "chi,p1,p2,eta,rate,harvested,regime,status"
    }
}

/// Writes `#`-prefixed preamble lines, the header and one line per record.
pub fn write_csv<T: Real, W: Write>(
    mut out: W,
    preamble: &[String],
    records: &[SweepRecord<T>],
    with_oracle: bool,
) -> io::Result<()> {
    let num = |x: Option<T>| x.map(|v| sig12(v.as_f64())).unwrap_or_default();
    for line in preamble {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{}", csv_header(with_oracle))?;
    for r in records {
        let p = r.p.map_or([None, None], |p| [Some(p[0]), Some(p[1])]);
        write!(
            out,
            "{},{},{},{},{},{},{},{}",
            sig12(r.chi.as_f64()),
            num(p[0]),
            num(p[1]),
            num(r.eta),
            num(r.rate),
            num(r.harvested),
            r.regime.map(|g| g.as_str()).unwrap_or(""),
            r.status.as_str(),
        )?;
        if with_oracle {
            write!(out, ",{}", num(r.oracle_eta))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Inclusive grid `start, start + step, ...` up to `end`, with the end point
/// snapped on when the last step lands within rounding of it.
pub fn linear_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !start.is_finite() || !end.is_finite() || start > end {
        return Err(Error::invalid(
            "range",
            format!("need finite start <= end, got {start}..{end}"),
        ));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::invalid(
            "step",
            format!("must be finite and > 0, got {step}"),
        ));
    }
    let count = ((end - start) / step + 1e-9).floor() as u64;
    let mut grid: Vec<f64> = (0..=count).map(|k| start + step * k as f64).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - end).abs() <= 1e-9 * step {
            *last = end;
        }
    }
    Ok(grid)
}
