//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mpdec_core::baselines::{classical_dec_step, explicit_euler_step, ssprk104_integrate, Scheme};
use mpdec_core::dec_tables::DecTables;
use mpdec_core::harness::{convergence_study, halving_sequence, ErrorReport};
use mpdec_core::linear_solve::{is_column_diagonally_dominant, solve};
use mpdec_core::mpdec::{assemble_mass_matrix, integrate, mpdec_step, CorrectionGrid, MPDeCConfig, Trajectory};
use mpdec_core::problems::{all_problems, linear_problem, nonlinear_problem, robertson_problem, ReferenceRecipe};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;

/// Linear-problem refinement levels: dt = 0.25 / 2^j, j = 0..6.
const LINEAR_LEVELS: usize = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn within_budget(outcome: Outcome, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    match budget {
        Some(b) if elapsed > b => Outcome::new(
            false,
            format!("{}; runtime {:.2?} exceeds {:.0?}", outcome.detail, elapsed, b),
        ),
        _ => outcome,
    }
}

fn run_order(problem_name: &str, order: usize) -> Trajectory {
    let problem = mpdec_core::problems::by_name(problem_name).unwrap();
    let config = MPDeCConfig::from_order(order).unwrap();
    integrate(&problem.system, &problem.c0, &problem.default_schedule().unwrap(), &config).unwrap()
}

fn conservation() -> Outcome {
    let mut worst = 0.0_f64;
    for problem in all_problems() {
        let schedule = problem.default_schedule().unwrap();
        for order in 2..=6 {
            let config = MPDeCConfig::from_order(order).unwrap();
            match integrate(&problem.system, &problem.c0, &schedule, &config) {
                Ok(traj) => {
                    // drift measured against the unfloored initial total
                    let total = problem.conserved_total();
                    for s in &traj.states {
                        worst = worst.max((s.sum() - total).abs() / total);
                    }
                }
                Err(e) => return Outcome::new(false, format!("{} order {order}: {e}", problem.name())),
            }
        }
    }
    Outcome::new(worst <= 1e-12, format!("max relative sum drift {worst:.2e} (limit 1e-12)"))
}

fn positivity() -> Outcome {
    let linear = linear_problem();
    let euler = explicit_euler_step(&linear.system, &linear.c0, 0.25).unwrap();
    if euler[0] >= 0.0 {
        return Outcome::new(false, format!("explicit Euler stayed positive: c1 = {}", euler[0]));
    }
    let mut min_linear = f64::INFINITY;
    for order in 1..=10 {
        min_linear = min_linear.min(run_order("linear", order).min_entry());
    }
    let mut min_robertson = f64::INFINITY;
    let mut final_time = f64::INFINITY;
    for order in 2..=6 {
        let traj = run_order("robertson", order);
        min_robertson = min_robertson.min(traj.min_entry());
        final_time = final_time.min(traj.final_time());
    }
    Outcome::new(
        min_linear > 0.0 && min_robertson > 0.0 && final_time >= 1e10,
        format!(
            "explicit Euler c1 = {:.3}; min entry linear {min_linear:.3e}, robertson {min_robertson:.3e} up to t = {final_time:.3e}",
            euler[0]
        ),
    )
}

fn linear_report(scheme: &Scheme) -> ErrorReport {
    let problem = linear_problem();
    convergence_study(&problem, scheme, &halving_sequence(0.25, LINEAR_LEVELS)).unwrap()
}

fn slope_check(scheme: &Scheme, expected: f64) -> (bool, String) {
    let report = linear_report(scheme);
    match report.last_valid_slope() {
        Some(s) => ((s - expected).abs() <= 0.3, format!("{} {s:.3}", scheme.label())),
        None => (false, format!("{} no valid slope", scheme.label())),
    }
}

fn order_verification() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for order in 2..=6 {
        let (ok, text) = slope_check(&Scheme::mpdec_order(order).unwrap(), order as f64);
        passed &= ok;
        parts.push(text);
    }
    Outcome::new(passed, format!("last valid slopes: {}", parts.join(", ")))
}

fn min_order_law() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (m, k) in [(4, 3), (2, 5)] {
        let (ok, text) = slope_check(&Scheme::MPDeC(MPDeCConfig::new(m, k).unwrap()), 3.0);
        passed &= ok;
        parts.push(format!("{text} (expected 3 +/- 0.3)"));
    }
    Outcome::new(passed, parts.join(", "))
}

fn oracle_equivalences() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mpe = MPDeCConfig::new(1, 1).unwrap();
    let mprk = MPDeCConfig::new(1, 2).unwrap();
    let (mut worst_mpe, mut worst_heun, mut worst_mprk) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let dim = rng.gen_range(2..=5);
        let system = random_system(&mut rng, dim);
        let c = random_state(&mut rng, dim);
        let dt = random_dt(&mut rng);

        let step = mpdec_step(&system, &c, dt, &mpe).unwrap();
        worst_mpe = worst_mpe.max(relative_difference(&step, &modified_patankar_euler(&system, &c, dt)));

        let step = classical_dec_step(&system, &c, dt, 1, 2).unwrap();
        worst_heun = worst_heun.max(relative_difference(&step, &heun(&system, &c, dt)));

        let step = mpdec_step(&system, &c, dt, &mprk).unwrap();
        worst_mprk = worst_mprk.max(relative_difference(&step, &modified_patankar_rk22(&system, &c, dt)));
    }
    Outcome::new(
        worst_mpe <= 1e-13 && worst_heun <= 1e-13 && worst_mprk <= 1e-13,
        format!(
            "1000 random inputs; max relative difference MPE {worst_mpe:.2e}, Heun {worst_heun:.2e}, MPRK22 {worst_mprk:.2e} (limit 1e-13)"
        ),
    )
}

fn mass_matrix_structure() -> Outcome {
    const TRIALS: usize = 10_000;
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let tables: Vec<DecTables> = (1..=5).map(|m| DecTables::build(m).unwrap()).collect();
    let mut failures = 0;
    for _ in 0..TRIALS {
        let dim = rng.gen_range(2..=6);
        let system = random_system(&mut rng, dim);
        let t = &tables[rng.gen_range(0..tables.len())];
        let states = (0..=t.subintervals()).map(|_| random_state(&mut rng, dim)).collect();
        let grid = CorrectionGrid::from_states(&system, states).unwrap();
        let m = rng.gen_range(1..=t.subintervals());
        let dt = random_dt(&mut rng);
        let mass = assemble_mass_matrix(&grid, t, m, dt).unwrap();
        let rhs: Vec<f64> = (0..dim).map(|_| rng.gen_range(1e-3..10.0)).collect();
        let dominant = is_column_diagonally_dominant(&mass);
        let positive = solve(&mass, &rhs).map(|x| x.iter().all(|&v| v > 0.0)).unwrap_or(false);
        if !(dominant && positive) {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{TRIALS} random systems, {failures} failures"))
}

fn algal_regression() -> Outcome {
    let problem = nonlinear_problem();
    let ReferenceRecipe::SspRk104 { dt: ref_dt } = problem.reference else {
        return Outcome::new(false, "algal reference is not SSP-RK(10,4)");
    };
    let steps = ((problem.t_end - problem.t_start) / ref_dt).round() as usize;
    let reference = ssprk104_integrate(&problem.system, &problem.c0, problem.t_start, ref_dt, steps).unwrap();
    let traj = run_order("algal", 6);
    let end = traj.final_state();
    let worst = end
        .iter()
        .zip(reference.final_state().iter())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let worst_decrease = traj
        .states
        .windows(2)
        .fold(0.0_f64, |m, w| m.max(w[0][2] - w[1][2]));
    Outcome::new(
        worst <= 1e-4 && worst_decrease <= 1e-12 && (traj.final_time() - 30.0).abs() < 1e-12,
        format!("max deviation at t = 30: {worst:.2e} (limit 1e-4); largest c3 decrease {worst_decrease:.2e} (limit 1e-12)"),
    )
}

fn robertson_robustness() -> Outcome {
    let problem = robertson_problem();
    let ReferenceRecipe::FineMpdec { order: ref_order, refinement } = problem.reference else {
        return Outcome::new(false, "robertson reference is not a fine mPDeC run");
    };
    let schedule = problem.default_schedule().unwrap();
    let reference = integrate(
        &problem.system,
        &problem.c0,
        &schedule.refined(refinement).unwrap(),
        &MPDeCConfig::from_order(ref_order).unwrap(),
    )
    .unwrap();
    let reference = reference.final_state();
    let mut passed = true;
    let mut worst = 0.0_f64;
    let mut notes = Vec::new();
    for order in 2..=6 {
        let config = MPDeCConfig::from_order(order).unwrap();
        let traj = match integrate(&problem.system, &problem.c0, &schedule, &config) {
            Ok(traj) => traj,
            Err(e) => return Outcome::new(false, format!("order {order} failed: {e}")),
        };
        let c = traj.final_state();
        let ordered = c[2] > c[0] && c[0] > c[1];
        let drift = traj.max_relative_sum_drift();
        let deviation = c.iter().zip(reference.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(deviation);
        if !(ordered && traj.min_entry() > 0.0 && drift <= 1e-12 && traj.final_time() >= 1e10) {
            passed = false;
            notes.push(format!("order {order}: c = {:?}, drift {drift:.2e}", c.as_slice()));
        }
    }
    passed &= worst <= 1e-3;
    let mut detail = format!(
        "{} steps to t >= 1e10 for orders 2-6; max deviation from reference {worst:.2e} (limit 1e-3)",
        schedule.num_steps()
    );
    if !notes.is_empty() {
        detail.push_str("; ");
        detail.push_str(&notes.join("; "));
    }
    Outcome::new(passed, detail)
}

fn theta_tables() -> Outcome {
    let t = DecTables::build(2).unwrap();
    let expected = [[5.0 / 24.0, 8.0 / 24.0, -1.0 / 24.0], [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]];
    let mut worst_entry = 0.0_f64;
    for (m, row) in expected.iter().enumerate() {
        for (r, v) in row.iter().enumerate() {
            worst_entry = worst_entry.max((t.theta_row(m + 1)[r] - v).abs());
        }
    }
    let mut worst_sum = 0.0_f64;
    for big_m in 1..=10 {
        let t = DecTables::build(big_m).unwrap();
        for m in 0..=big_m {
            let sum: f64 = t.theta_row(m).iter().sum();
            worst_sum = worst_sum.max((sum - t.beta()[m]).abs());
            worst_sum = worst_sum.max((t.beta()[m] - m as f64 / big_m as f64).abs());
        }
    }
    Outcome::new(
        worst_entry <= 1e-15 && worst_sum <= 1e-14,
        format!("M = 2 entries off by {worst_entry:.1e} (limit 1e-15); row sums off by {worst_sum:.1e} for M <= 10 (limit 1e-14)"),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [(&str, Check, Option<Duration>); 9] = [
        ("conservation", conservation, secs(5)),
        ("positivity", positivity, secs(5)),
        ("order verification", order_verification, secs(30)),
        ("min(M+1, K) law", min_order_law, None),
        ("oracle equivalences", oracle_equivalences, None),
        ("mass-matrix structure", mass_matrix_structure, None),
        ("algal regression", algal_regression, None),
        ("robertson robustness", robertson_robustness, secs(10)),
        ("theta tables", theta_tables, None),
    ];
    let mut failed = 0;
    for (index, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = within_budget(check(), start.elapsed(), budget);
        let elapsed = start.elapsed();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {} ({elapsed:.2?})", index + 1, outcome.detail);
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
