//! `swipt-ee`: solve, inspect and sweep two-user SWIPT power allocation
//! problems described in scenario files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use swipt_ee::allocator::{
    kkt_residuals, solve, solve_with, thresholds, SolverOutcome, Thresholds,
};
use swipt_ee::format::sig12;
use swipt_ee::model::{efficiency_net, Deduction, Demand, PowerAllocation, Scenario, UserLink};
use swipt_ee::oracle::refined_search;
use swipt_ee::scenario_file::ScenarioFile;
use swipt_ee::sweep::{
    linear_grid, sample_scenario, scenario_preamble, sweep_chi, sweep_circuit_power, sweep_power,
    write_csv, OracleSettings, RNG_ALGORITHM,
};
use swipt_ee::Error;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "swipt-ee",
    version,
    about = "Energy-efficient power allocation for two-user SWIPT"
)]
struct Cli {
    /// Worker threads for sweeps and oracle searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal allocation for one demand.
    Solve {
        scenario: PathBuf,
        /// Harvested-energy demand in Joules.
        #[arg(long)]
        chi: f64,
        #[arg(long)]
        json: bool,
    },
    /// Demand thresholds chi_star, chi_prime and chi_max.
    Thresholds {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Sweep demand, transmit power or circuit power and write a CSV file.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        end: f64,
        #[arg(long)]
        step: f64,
        /// User whose power is swept with `--axis power` (1 or 2).
        #[arg(long, default_value_t = 1)]
        user: usize,
        /// Fixed demand for `--axis power` and `--axis pc`.
        #[arg(long, default_value_t = 0.0)]
        chi: f64,
        /// Add a brute-force efficiency column (demand sweeps only).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 400)]
        coarse_n: u64,
        #[arg(long, default_value_t = 2)]
        refine_rounds: u32,
        #[arg(long, short)]
        output: PathBuf,
        /// Overwrite an existing output file.
        #[arg(long)]
        force: bool,
    },
    /// Compare the closed-form solver against the brute-force oracle.
    Verify {
        scenario: PathBuf,
        /// Number of demand points, evenly spaced over [0, chi_max].
        #[arg(long, default_value_t = 50)]
        chi_points: usize,
        /// Points per axis of the coarse oracle lattice.
        #[arg(long, default_value_t = 400)]
        resolution: u64,
        #[arg(long, default_value_t = 2)]
        refine_rounds: u32,
        /// Largest accepted efficiency gap in bits/Joule.
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
        /// Self-test: scale the leader's decoder gain seen by the solver by
        /// (1 + value). A nonzero value should make verification fail.
        #[arg(long, default_value_t = 0.0)]
        perturb_gain: f64,
    },
    /// Draw a random scenario with exponentially distributed channel gains.
    Sample {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        mean_gain: f64,
        /// Scenario supplying powers, noise and block length.
        #[arg(long)]
        template: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Chi,
    Power,
    Pc,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Chi => "chi",
            Axis::Power => "power",
            Axis::Pc => "pc",
        }
    }
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } | Error::InfeasibleEverywhere { .. } => EXIT_INFEASIBLE,
            Error::DenominatorNonpositive { .. }
            | Error::Domain { .. }
            | Error::ConstraintForcedActive { .. }
            | Error::NoRoot { .. }
            | Error::ZeroConsumption => EXIT_NUMERICAL,
            Error::InvalidParameter { .. } | Error::InvalidAllocation(_) | Error::Parse { .. } => {
                EXIT_USAGE
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    usage(format!("{}: {e}", path.display()))
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(EXIT_USAGE);
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Solve {
            scenario,
            chi,
            json,
        } => cmd_solve(&scenario, chi, json).map(|_| 0),
        Command::Thresholds { scenario, json } => cmd_thresholds(&scenario, json).map(|_| 0),
        Command::Sweep {
            scenario,
            axis,
            start,
            end,
            step,
            user,
            chi,
            oracle,
            coarse_n,
            refine_rounds,
            output,
            force,
        } => {
            let settings = oracle.then_some(OracleSettings {
                coarse_n,
                refine_rounds,
            });
            cmd_sweep(
                &scenario,
                axis,
                (start, end, step),
                user,
                chi,
                settings,
                &output,
                force,
            )
            .map(|_| 0)
        }
        Command::Verify {
            scenario,
            chi_points,
            resolution,
            refine_rounds,
            tolerance,
            perturb_gain,
        } => cmd_verify(
            &scenario,
            chi_points,
            resolution,
            refine_rounds,
            tolerance,
            perturb_gain,
        ),
        Command::Sample {
            seed,
            mean_gain,
            template,
            output,
            force,
        } => cmd_sample(seed, mean_gain, &template, &output, force).map(|_| 0),
    }
}

fn load(path: &Path) -> CliResult<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let file = ScenarioFile::parse(&text).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(file.scenario)
}

/// Creates `path` for writing, refusing to replace an existing file unless
/// `force` is set.
fn create_output(path: &Path, force: bool) -> CliResult<fs::File> {
    if path.exists() && !force {
        return Err(usage(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    fs::File::create(path).map_err(|e| io_failure(path, e))
}

/// Rounds to the reported precision so text and JSON carry the same values.
fn reported(x: f64) -> Value {
    if x.is_finite() {
        json!(sig12(x).parse::<f64>().expect("formatted number parses"))
    } else {
        Value::Null
    }
}

fn text(x: f64) -> String {
    if x.is_finite() {
        sig12(x)
    } else {
        "n/a".into()
    }
}

fn threshold_fields(th: &Thresholds) -> Vec<(&'static str, Value, String)> {
    vec![
        ("chi_star", reported(th.chi_star), text(th.chi_star)),
        ("chi_prime", reported(th.chi_prime), text(th.chi_prime)),
        ("chi_max", reported(th.chi_max), text(th.chi_max)),
        ("leader", json!(th.leader + 1), (th.leader + 1).to_string()),
        (
            "degenerate",
            json!(th.degenerate),
            th.degenerate.to_string(),
        ),
        (
            "active_from_zero",
            json!(th.active_from_zero),
            th.active_from_zero.to_string(),
        ),
    ]
}

fn print_fields(fields: Vec<(&'static str, Value, String)>, as_json: bool) {
    if as_json {
        let map: Map<String, Value> = fields
            .into_iter()
            .map(|(k, v, _)| (k.to_string(), v))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&Value::Object(map)).expect("serialisable")
        );
    } else {
        let width = fields.iter().map(|(k, _, _)| k.len()).max().unwrap_or(0);
        for (key, _, value) in fields {
            println!("{key:<width$} = {value}");
        }
    }
}

fn cmd_solve(path: &Path, chi: f64, as_json: bool) -> CliResult {
    let s = load(path)?;
    let out = solve(&s, chi)?;
    let kkt = kkt_residuals(&s, &out, chi)?;
    let slack = kkt.bound_slack();
    let mut fields = vec![
        ("chi", reported(chi), text(chi)),
        ("p1", reported(out.alloc.p[0]), text(out.alloc.p[0])),
        ("p2", reported(out.alloc.p[1]), text(out.alloc.p[1])),
        ("eta", reported(out.eta), text(out.eta)),
        ("rate", reported(out.rate), text(out.rate)),
        ("harvested", reported(out.harvested), text(out.harvested)),
        ("regime", json!(out.regime.as_str()), out.regime.to_string()),
        ("multiplier", reported(out.multiplier), text(out.multiplier)),
    ];
    fields.extend(threshold_fields(&out.thresholds));
    fields.extend([
        (
            "kkt_gradient_p1",
            reported(kkt.gradient[0]),
            text(kkt.gradient[0]),
        ),
        (
            "kkt_gradient_p2",
            reported(kkt.gradient[1]),
            text(kkt.gradient[1]),
        ),
        (
            "kkt_stationarity",
            reported(kkt.stationarity()),
            text(kkt.stationarity()),
        ),
        ("kkt_bound_slack", reported(slack), text(slack)),
        (
            "kkt_complementary_slackness",
            reported(kkt.complementary_slackness),
            text(kkt.complementary_slackness),
        ),
    ]);
    print_fields(fields, as_json);
    Ok(())
}

fn cmd_thresholds(path: &Path, as_json: bool) -> CliResult {
    let s = load(path)?;
    let th = thresholds(&s)?;
    print_fields(threshold_fields(&th), as_json);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    path: &Path,
    axis: Axis,
    (start, end, step): (f64, f64, f64),
    user: usize,
    chi: f64,
    oracle: Option<OracleSettings>,
    output: &Path,
    force: bool,
) -> CliResult {
    let s = load(path)?;
    let grid = linear_grid(start, end, step)?;
    if oracle.is_some() && !matches!(axis, Axis::Chi) {
        return Err(usage("--oracle is only available with --axis chi"));
    }
    if let Some(settings) = oracle {
        if settings.coarse_n < 2 {
            return Err(usage("--coarse-n must be >= 2"));
        }
    }
    let records = match axis {
        Axis::Chi => sweep_chi(&s, &grid, oracle)?,
        Axis::Power => {
            if !(1..=2).contains(&user) {
                return Err(usage(format!("--user must be 1 or 2, got {user}")));
            }
            sweep_power(&s, user - 1, &grid, chi)?
        }
        Axis::Pc => sweep_circuit_power(&s, &grid, chi)?,
    };

    let mut preamble = vec![format!(
        "swipt-ee sweep axis={} start={} end={} step={} points={}",
        axis.name(),
        sig12(start),
        sig12(end),
        sig12(step),
        grid.len()
    )];
    match axis {
        Axis::Chi => {}
        Axis::Power => preamble.push(format!("swept user={user} chi={}", sig12(chi))),
        Axis::Pc => preamble.push(format!(
            "chi={} (rows follow the circuit-power grid)",
            sig12(chi)
        )),
    }
    preamble.extend(scenario_preamble(&s));
    if let Some(o) = oracle {
        preamble.push(format!(
            "oracle coarse_n={} refine_rounds={}",
            o.coarse_n, o.refine_rounds
        ));
    }

    let file = create_output(output, force)?;
    let mut writer = BufWriter::new(file);
    write_csv(&mut writer, &preamble, &records, oracle.is_some())
        .and_then(|_| writer.flush())
        .map_err(|e| io_failure(output, e))?;
    println!("wrote {} rows to {}", records.len(), output.display());
    Ok(())
}

fn cmd_verify(
    path: &Path,
    chi_points: usize,
    resolution: u64,
    refine_rounds: u32,
    tolerance: f64,
    perturb_gain: f64,
) -> CliResult<u8> {
    let s = load(path)?;
    if resolution < 2 {
        return Err(usage("--resolution must be >= 2"));
    }
    if chi_points < 1 {
        return Err(usage("--chi-points must be >= 1"));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(usage("--tolerance must be >= 0"));
    }
    let solver_view = perturbed(&s, perturb_gain)?;
    let th = thresholds(&solver_view)?;
    let chi_max = s.chi_max();
    let grid: Vec<f64> = if chi_points == 1 {
        vec![0.0]
    } else {
        (0..chi_points)
            .map(|k| chi_max * k as f64 / (chi_points - 1) as f64)
            .collect()
    };
    let final_resolution = resolution as f64 * 10f64.powi(refine_rounds as i32);
    let cell = s.p_max().map(|p| p / final_resolution);

    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&chi| -> CliResult<(f64, f64, f64)> {
            let out: SolverOutcome = solve_with(&solver_view, chi, &th)?;
            // Judge the solver's allocation on the true scenario.
            let alloc = PowerAllocation { p: out.alloc.p };
            let eta = efficiency_net(&alloc, &s, &Demand::new(chi)?, Deduction::Demand)?;
            let oracle = refined_search(&s, chi, resolution, refine_rounds)?;
            let gap = (eta - oracle.eta).abs();
            let cells = (0..2)
                .map(|m| {
                    let d = (alloc.p[m] - oracle.alloc.p[m]).abs();
                    if cell[m] > 0.0 {
                        d / cell[m]
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max);
            Ok((chi, gap, cells))
        })
        .collect::<CliResult<_>>()?;

    let mut worst_gap = (0.0, 0.0);
    let mut worst_cells = (0.0, 0.0);
    let mut failures = 0;
    for &(chi, gap, cells) in &rows {
        if gap > worst_gap.1 {
            worst_gap = (chi, gap);
        }
        if cells > worst_cells.1 {
            worst_cells = (chi, cells);
        }
        if gap > tolerance || cells > 1.0 + 1e-9 {
            failures += 1;
        }
    }
    println!("points            = {}", rows.len());
    println!("oracle grid       = {resolution} x 10^{refine_rounds}");
    println!(
        "max |delta eta|   = {} (chi = {})",
        sig12(worst_gap.1),
        sig12(worst_gap.0)
    );
    println!(
        "max alloc cells   = {} (chi = {})",
        sig12(worst_cells.1),
        sig12(worst_cells.0)
    );
    println!("tolerance         = {}", sig12(tolerance));
    if failures == 0 {
        println!("result            = PASS");
        Ok(0)
    } else {
        println!(
            "result            = FAIL ({failures} of {} points)",
            rows.len()
        );
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn perturbed(s: &Scenario, factor: f64) -> CliResult<Scenario> {
    if factor == 0.0 {
        return Ok(*s);
    }
    let th = thresholds(s)?;
    let u = s.user(th.leader);
    let link = UserLink::new(u.h * (1.0 + factor), u.g, u.p_max, u.p_circuit)?;
    Ok(s.with_user(th.leader, link)?)
}

fn cmd_sample(seed: u64, mean_gain: f64, template: &Path, output: &Path, force: bool) -> CliResult {
    let base = load(template)?;
    let scenario = sample_scenario(seed, mean_gain, &base)?;
    let file = ScenarioFile {
        scenario,
        comments: vec![
            format!("sampled with seed={seed} mean_gain={}", sig12(mean_gain)),
            format!("rng: {RNG_ALGORITHM}"),
        ],
    };
    let mut out = create_output(output, force)?;
    out.write_all(file.to_text().as_bytes())
        .map_err(|e| io_failure(output, e))?;
    println!("wrote {}", output.display());
    Ok(())
}
