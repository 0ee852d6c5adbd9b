//! Brute-force maximiser of the demand-deducted net efficiency, independent of
//! the closed forms in [`crate::allocator`].
//!
//! The search evaluates the model functions directly on a lattice over the
//! power box and rejects points that miss the demand. Since the optimum
//! usually sits on the harvest boundary `T g.p + sigma_H^2 = chi`, which a
//! square lattice only touches by accident, the boundary segment inside the
//! current window is sampled as well: one coordinate runs over the lattice and
//! the other is solved from the boundary equation.
//!
//! Lattice coordinates are `p_max * (k / N)`, so a lattice with `2N` points per
//! axis contains every point of the one with `N`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    efficiency_net, harvested_energy, Deduction, Demand, PowerAllocation, Scenario,
};
use crate::scalar::Real;

/// Best feasible point found by the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult<T = f64> {
    pub alloc: PowerAllocation<T>,
    pub eta: T,
    /// Largest lattice spacing of the final grid, in Watts.
    pub grid_step: T,
    /// Feasible points evaluated over all rounds.
    pub feasible_points: u64,
}

/// Exhaustive search over the `(n+1)^2` lattice on the power box, plus the
/// harvest boundary.
pub fn grid_search<T: Real>(s: &Scenario<T>, chi: T, n: u64) -> Result<OracleResult<T>> {
    refined_search(s, chi, n, 0)
}

/// [`grid_search`] followed by `refine_rounds` passes that re-grid a +-2 cell
/// window around the incumbent at ten times the resolution.
pub fn refined_search<T: Real>(
    s: &Scenario<T>,
    chi: T,
    coarse_n: u64,
    refine_rounds: u32,
) -> Result<OracleResult<T>> {
    if coarse_n < 2 {
        return Err(Error::invalid("n", format!("must be >= 2, got {coarse_n}")));
    }
    let demand = Demand::new(chi)?;
    let chi_max = s.chi_max();
    if chi > chi_max + T::HARVEST_SLACK * chi_max.max(T::one()) {
        return Err(Error::InfeasibleEverywhere { chi: chi.as_f64() });
    }

    let p_max = s.p_max();
    let mut resolution = coarse_n;
    let mut window = [0, 1].map(|m| (0, axis_len(p_max[m], resolution)));
    let mut feasible_points = 0u64;
    let mut best: Option<Candidate<T>> = None;
    for round in 0..=refine_rounds {
        if round > 0 {
            let Some(Candidate { p, .. }) = best else {
                break;
            };
            resolution *= 10;
            window = [0, 1].map(|m| {
                let last = axis_len(p_max[m], resolution);
                if last == 0 {
                    return (0, 0);
                }
                let centre = (p[m] / p_max[m] * T::from_u64(resolution).unwrap()).round();
                let centre = centre.to_u64().unwrap_or(0).min(last);
                (centre.saturating_sub(20), (centre + 20).min(last))
            });
        }
        let grid = Grid {
            s,
            demand: &demand,
            p_max,
            resolution,
            window,
        };
        let (found, count) = grid.search();
        feasible_points += count;
        best = pick(best, found);
    }

    let Some(best) = best else {
        return Err(Error::InfeasibleEverywhere { chi: chi.as_f64() });
    };
    // Re-verify the winner from scratch rather than trusting the loop.
    let alloc = PowerAllocation { p: best.p };
    let eta = efficiency_net(&alloc, s, &demand, Deduction::Demand)?;
    if !feasible(s, &alloc, chi) {
        return Err(Error::InfeasibleEverywhere { chi: chi.as_f64() });
    }
    let grid_step = [0, 1]
        .map(|m| p_max[m] / T::from_u64(resolution).unwrap())
        .into_iter()
        .fold(T::zero(), T::max);
    Ok(OracleResult {
        alloc,
        eta,
        grid_step,
        feasible_points,
    })
}

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    p: [T; 2],
    eta: T,
}

/// Higher efficiency wins; exact ties go to the lexicographically smaller
/// allocation.
fn better<T: Real>(a: &Candidate<T>, b: &Candidate<T>) -> bool {
    a.eta > b.eta || (a.eta == b.eta && (a.p[0], a.p[1]) < (b.p[0], b.p[1]))
}

fn pick<T: Real>(a: Option<Candidate<T>>, b: Option<Candidate<T>>) -> Option<Candidate<T>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if better(&b, &a) { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Last lattice index on an axis; a disabled user collapses to one point.
fn axis_len<T: Real>(p_max: T, resolution: u64) -> u64 {
    if p_max > T::zero() {
        resolution
    } else {
        0
    }
}

fn feasible<T: Real>(s: &Scenario<T>, alloc: &PowerAllocation<T>, chi: T) -> bool {
    harvested_energy(alloc, s).is_ok_and(|e| e >= chi - T::HARVEST_SLACK * chi.max(T::one()))
}

struct Grid<'a, T> {
    s: &'a Scenario<T>,
    demand: &'a Demand<T>,
    p_max: [T; 2],
    resolution: u64,
    /// Inclusive index range per axis.
    window: [(u64, u64); 2],
}

impl<T: Real> Grid<'_, T> {
    fn coord(&self, axis: usize, k: u64) -> T {
        if k == self.resolution {
            return self.p_max[axis];
        }
        self.p_max[axis] * (T::from_u64(k).unwrap() / T::from_u64(self.resolution).unwrap())
    }

    fn bounds(&self, axis: usize) -> (T, T) {
        let (lo, hi) = self.window[axis];
        (self.coord(axis, lo), self.coord(axis, hi))
    }

    fn evaluate(&self, p: [T; 2]) -> Option<Candidate<T>> {
        let alloc = PowerAllocation { p };
        if !feasible(self.s, &alloc, self.demand.chi()) {
            return None;
        }
        let eta = efficiency_net(&alloc, self.s, self.demand, Deduction::Demand).ok()?;
        Some(Candidate { p, eta })
    }

    fn search(&self) -> (Option<Candidate<T>>, u64) {
        let (lo0, hi0) = self.window[0];
        let (lo1, hi1) = self.window[1];
        let rows: Vec<(Option<Candidate<T>>, u64)> = (lo0..=hi0)
            .into_par_iter()
            .map(|k0| {
                let p0 = self.coord(0, k0);
                let mut best = None;
                let mut count = 0;
                for k1 in lo1..=hi1 {
                    if let Some(c) = self.evaluate([p0, self.coord(1, k1)]) {
                        count += 1;
                        best = pick(best, Some(c));
                    }
                }
                (best, count)
            })
            .collect();
        // Fixed-order reduction keeps the result independent of scheduling.
        let (mut best, mut count) = (None, 0);
        for (row_best, row_count) in rows {
            best = pick(best, row_best);
            count += row_count;
        }
        let (line_best, line_count) = self.search_boundary();
        (pick(best, line_best), count + line_count)
    }

    /// Samples `T g.p + sigma_H^2 = chi` inside the window.
    fn search_boundary(&self) -> (Option<Candidate<T>>, u64) {
        let s = self.s;
        let g = s.g();
        let need = (self.demand.chi() - s.sigma_h_sq()) / s.block_t();
        if need <= T::zero() {
            return (None, 0);
        }
        // Run over the axis with the weaker harvesting gain and solve for the
        // other, so the solved coordinate moves slowly along the segment.
        let (a, b) = if g[1] >= g[0] { (0, 1) } else { (1, 0) };
        if g[b] <= T::zero() {
            return (None, 0);
        }
        let (lo_a, hi_a) = self.bounds(a);
        let (lo_b, hi_b) = self.bounds(b);
        let solve_b = |x_a: T| (need - g[a] * x_a) / g[b];
        let point = |x_a: T, x_b: T| {
            let mut p = [T::zero(); 2];
            p[a] = x_a;
            p[b] = x_b;
            p
        };

        let mut points = Vec::new();
        let (ka_lo, ka_hi) = self.window[a];
        for k in ka_lo..=ka_hi {
            let x_a = self.coord(a, k);
            let x_b = solve_b(x_a);
            if x_b >= lo_b && x_b <= hi_b {
                points.push(point(x_a, x_b));
            }
        }
        // Exact ends of the segment where it leaves the window.
        if g[a] > T::zero() {
            for x_b in [lo_b, hi_b] {
                let x_a = (need - g[b] * x_b) / g[a];
                if x_a >= lo_a && x_a <= hi_a {
                    points.push(point(x_a, x_b));
                }
            }
        }

        let mut best = None;
        let mut count = 0;
        for p in points {
            if let Some(c) = self.evaluate(p) {
                count += 1;
                best = pick(best, Some(c));
            }
        }
        (best, count)
    }
}
