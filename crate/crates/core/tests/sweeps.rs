use swipt_ee::model::{Scenario, UserLink};
use swipt_ee::sweep::{
    linear_grid, sample_scenario, sweep_chi, sweep_circuit_power, sweep_power, ExponentialSampler,
    OracleSettings, RowStatus,
};
use swipt_ee::{solve, Regime};

fn reference(g2: f64) -> Scenario {
    let users = [
        UserLink::new(0.8, 0.5, 2.0, 0.3).unwrap(),
        UserLink::new(0.4, g2, 2.0, 0.3).unwrap(),
    ];
    Scenario::with_defaults(users).unwrap()
}

#[test]
fn singleton_grid_equals_solve() {
    let s = reference(0.3);
    let rows = sweep_chi(&s, &[0.0], None).unwrap();
    let out = solve(&s, 0.0).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].p, Some(out.alloc.p));
    assert_eq!(rows[0].eta, Some(out.eta));
    assert_eq!(rows[0].regime, Some(Regime::ConstraintInactive));
}

#[test]
fn follower_silent_up_to_leader_peak() {
    let s = reference(0.3);
    let grid = linear_grid(0.0, 1.6, 0.01).unwrap();
    for r in sweep_chi(&s, &grid, None).unwrap() {
        let p = r.p.unwrap();
        if r.chi <= 1.0 {
            assert_eq!(p[1], 0.0, "chi={}", r.chi);
        } else {
            assert!(p[1] > 0.0, "chi={}", r.chi);
        }
    }
}

#[test]
fn records_are_self_consistent() {
    use swipt_ee::model::{
        efficiency_net, harvested_energy, sum_rate, Deduction, Demand, PowerAllocation,
    };
    let s = reference(0.8);
    let grid = linear_grid(0.0, 1.8, 0.05).unwrap();
    for r in sweep_chi(&s, &grid, None).unwrap() {
        if r.status != RowStatus::Ok {
            assert!(r.chi > s.chi_max());
            continue;
        }
        let alloc = PowerAllocation { p: r.p.unwrap() };
        let d = Demand::new(r.chi).unwrap();
        assert_eq!(
            r.eta,
            Some(efficiency_net(&alloc, &s, &d, Deduction::Demand).unwrap())
        );
        assert_eq!(r.rate, Some(sum_rate(&alloc, &s).unwrap()));
        assert_eq!(r.harvested, Some(harvested_energy(&alloc, &s).unwrap()));
    }
}

#[test]
fn oracle_column_within_resolution() {
    let s = reference(0.8);
    let grid = linear_grid(0.0, 1.6, 0.2).unwrap();
    let settings = OracleSettings {
        coarse_n: 100,
        refine_rounds: 2,
    };
    for r in sweep_chi(&s, &grid, Some(settings)).unwrap() {
        let (eta, oracle) = (r.eta.unwrap(), r.oracle_eta.unwrap());
        assert!(
            oracle <= eta + 1e-9 && eta - oracle <= 1e-5,
            "chi={}",
            r.chi
        );
    }
}

#[test]
fn power_slice_peaks_at_unconstrained_optimum() {
    let s = Scenario::with_defaults([
        UserLink::new(1.0, 0.5, 4.0, 1.0).unwrap(),
        UserLink::new(0.5, 0.5, 4.0, 0.0).unwrap(),
    ])
    .unwrap();
    let step = 0.001;
    let grid = linear_grid(0.0, 4.0, step).unwrap();
    let argmax = |chi: f64| {
        let rows = sweep_power(&s, 0, &grid, chi).unwrap();
        assert_eq!(rows[0].eta, Some(0.0));
        rows.iter()
            .max_by(|a, b| a.eta.unwrap().total_cmp(&b.eta.unwrap()))
            .map(|r| (r.p.unwrap()[0], r.eta.unwrap()))
            .unwrap()
    };
    let (p0, eta0) = argmax(0.0);
    assert!((p0 - (std::f64::consts::E - 1.0)).abs() <= step);
    let (p1, eta1) = argmax(0.5);
    assert!(p1 < p0 && eta1 > eta0);
    assert!(sweep_power(&s, 2, &grid, 0.0).is_err());
}

#[test]
fn leader_power_grows_with_circuit_power() {
    let s = reference(0.3);
    let grid = linear_grid(0.25, 20.0, 0.25).unwrap();
    let rows = sweep_circuit_power(&s, &grid, 0.0).unwrap();
    let mut last = 0.0;
    for r in &rows {
        let p = r.p.unwrap()[0];
        assert!(p >= last - 1e-12);
        last = p;
    }
    assert_eq!(rows.last().unwrap().p.unwrap()[0], 2.0);
    // P_c = chi puts the stationary point at zero power, where the net
    // consumption vanishes: the row is marked instead of dropped.
    let users = [
        UserLink::new(1.0, 0.0, 2.0, 0.25).unwrap(),
        UserLink::new(0.5, 0.0, 0.0, 0.25).unwrap(),
    ];
    let s = Scenario::new(users, 0.5, 1.0).unwrap();
    let row = sweep_circuit_power(&s, &[0.5], 0.5).unwrap()[0];
    assert_eq!(row.status, RowStatus::DenominatorNonpositive);
    let near = |chi: f64| sweep_circuit_power(&s, &[0.5], chi).unwrap()[0].p.unwrap()[0];
    assert!(near(0.4999) < near(0.49) && near(0.4999) < 0.02 && near(0.49999999) < 2e-4);
}

#[test]
fn exponential_draws_have_the_requested_mean() {
    let mean = |a: f64| {
        let mut sampler = ExponentialSampler::new(42, a).unwrap();
        (0..100_000).map(|_| sampler.draw()).sum::<f64>() / 100_000.0
    };
    let m1 = mean(1.0);
    assert!((m1 - 1.0).abs() < 0.01, "{m1}");
    assert!((mean(2.0) / m1 - 2.0).abs() < 0.02);
    let s = sample_scenario(3, 1.0, &reference(0.3)).unwrap();
    assert_eq!(s, sample_scenario(3, 1.0, &reference(0.3)).unwrap());
}
