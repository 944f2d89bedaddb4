//! Acceptance checks. Each check compares the library against an oracle
//! that does not share code with the thing it tests (closed forms, exact
//! ODE solutions, re-derived inequalities) and returns a one-line verdict.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{mass, odi_report};
use crate::model::{init_state, make_grid, GridSpec, InitialCondition, ModelParams, State};
use crate::regime::{classify, exponent_set, exponent_verdict, kappa, RegimeCase, ScanSettings};
use crate::solver::{run, run_observed, stable_dt, Outcome, SolverConfig, Stepper};
use crate::sweep::{run_sweep, SweepSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{tag}] {} {}: {} ({:.1}s)",
            self.id, self.name, self.detail, self.seconds
        )
    }
}

fn check(id: u8, name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        id,
        name,
        passed,
        detail,
        seconds: 0.0,
    }
}

/// Closed form of `K(p, n, eta)` with plain powers.
fn kappa_oracle(p: f64, n: f64, eta: f64) -> f64 {
    2.0 * p.powf((p + 1.0) / 2.0) * (p + n + eta - 1.0).powf((p + 1.0) / 2.0) / (p + 1.0)
        * (8.0 * (4.0 * p * p + n) * (p - 1.0) / (p * (p + 1.0))).powf((p - 1.0) / 2.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn exact_constants() -> Check {
    let k = kappa(2.0, 2, 0.0).unwrap_or(f64::NAN);
    let worst = rel(k, 48.0);
    let mut ok = worst <= 1e-12 && rel(kappa_oracle(2.0, 2.0, 0.0), 48.0) <= 1e-12;
    let mut limit_worst: f64 = 0.0;
    let p = 1.0 + 1e-8;
    for n in 1..=3usize {
        for eta in [0.0, 1.0] {
            let target = n as f64 + eta;
            let e = rel(kappa(p, n, eta).unwrap_or(f64::NAN), target)
                .max(rel(kappa_oracle(p, n as f64, eta), target));
            limit_worst = limit_worst.max(e);
        }
    }
    ok &= limit_worst <= 1e-6;
    check(
        1,
        "exact-constant oracle",
        ok,
        format!("K(2,2,0)={k} (rel err {worst:.1e}); p->1 limit worst rel err {limit_worst:.1e}"),
    )
}

pub fn gradient_inequality_characterization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut tested, mut skipped, mut mismatches) = (0, 0, 0);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=5usize);
        let p = 1.0 + 10f64.powf(rng.gen_range(-4.0..3.0));
        let gamma = rng.gen_range(0.0..=2.0);
        let threshold = 2.0 * n as f64 / (n as f64 + 1.0);
        if (gamma - threshold).abs() <= 1e-10 {
            skipped += 1;
            continue;
        }
        tested += 1;
        let flag = exponent_set(p, gamma, 1.0, 1.0, n)
            .map(|es| exponent_verdict(&es, gamma).sigma_theta_bar_below_one)
            .unwrap_or(false);
        if flag != (gamma > threshold) {
            mismatches += 1;
        }
    }
    check(
        2,
        "gradient inequality characterization",
        mismatches == 0,
        format!("{tested} tuples, {skipped} on the boundary, {mismatches} mismatches"),
    )
}

pub fn classifier_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut mismatches, mut ties) = (0, 0);
    let mut counts = [0usize; 4];
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3usize);
        let params = ModelParams {
            m1: rng.gen_range(0.0..2.0),
            m2: rng.gen_range(0.0..1.5),
            chi: rng.gen_range(0.0..2.0),
            lambda: 1.0,
            mu: 10f64.powf(rng.gen_range(-3.0..3.0)),
            c: 1.0,
            gamma: rng.gen_range(1.0..=2.0),
            dim: n,
        };
        let v0 = rng.gen_range(0.0..2.0);
        let report = classify(&params, v0, ScanSettings::default());

        let nf = n as f64;
        let grad = 2.0 * nf / (nf + 1.0);
        let sens = nf * (2.0 * params.m2 - params.m1 + 1.0) / (nf + 1.0);
        let g = params.gamma;
        let expected = if grad.max(sens) < g && g <= 2.0 {
            RegimeCase::A1
        } else if sens < g && g <= grad {
            match report.p0_used {
                Some(p0) => {
                    let thr =
                        4.0 / p0 * kappa_oracle(p0, nf, 0.0) * (params.chi * v0).powf(2.0 * p0);
                    if (params.mu - thr).abs() <= 1e-9 * thr {
                        ties += 1;
                        report.case
                    } else if params.mu > thr {
                        RegimeCase::A2WithMu
                    } else {
                        RegimeCase::A2MuTooSmall
                    }
                }
                None => RegimeCase::A2MuTooSmall,
            }
        } else {
            RegimeCase::None
        };
        counts[expected as usize] += 1;
        if expected != report.case {
            mismatches += 1;
        }
    }
    check(
        3,
        "regime classifier consistency",
        mismatches == 0,
        format!(
            "1000 sets (A1 {}, A2_with_mu {}, A2_mu_too_small {}, none {}), {ties} ties, {mismatches} mismatches",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

pub fn uniform_logistic() -> Check {
    let grid = make_grid(GridSpec::line(1.0, 32)).expect("valid grid");
    let params = ModelParams {
        m1: 1.0,
        m2: 1.0,
        chi: 1.0,
        lambda: 1.0,
        mu: 1.0,
        c: 1.0,
        gamma: 2.0,
        dim: 1,
    };
    let initial = init_state(
        &grid,
        &InitialCondition::constant(1.0),
        &InitialCondition::constant(1.0),
    )
    .expect("valid initial data");
    let cfg = SolverConfig {
        t_end: 1.0,
        record_every: 0.1,
        ..SolverConfig::default()
    };
    let r = run(&initial, &params, &grid, &cfg);
    let s = &r.final_state;
    let du = s.u.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
    let dv =
        s.v.iter()
            .map(|v| (v - (-1f64).exp()).abs())
            .fold(0.0, f64::max);
    let ok = r.outcome == Outcome::Completed && s.t == 1.0 && du <= 1e-6 && dv <= 1e-3;
    check(
        4,
        "uniform logistic oracle",
        ok,
        format!("max|u-1|={du:.1e}, max|v-exp(-1)|={dv:.1e} at t={}", s.t),
    )
}

fn heat_error(n: usize) -> f64 {
    use std::f64::consts::PI;
    let grid = make_grid(GridSpec::line(1.0, n)).expect("valid grid");
    let params = ModelParams {
        m1: 1.0,
        m2: 1.0,
        chi: 0.0,
        lambda: 0.0,
        mu: 0.0,
        c: 0.0,
        gamma: 2.0,
        dim: 1,
    };
    let initial = State {
        t: 0.0,
        u: (0..n)
            .map(|i| 1.0 + (PI * grid.center(0, i)).cos())
            .collect(),
        v: vec![0.0; n],
    };
    let t = 0.1;
    let cfg = SolverConfig {
        t_end: t,
        record_every: t,
        snapshot_every: t,
        ..SolverConfig::default()
    };
    let r = run(&initial, &params, &grid, &cfg);
    let decay = (-PI * PI * t).exp();
    (0..n)
        .map(|i| (r.final_state.u[i] - 1.0 - decay * (PI * grid.center(0, i)).cos()).abs())
        .fold(0.0, f64::max)
}

pub fn heat_convergence() -> Check {
    let errors: Vec<f64> = [32, 64, 128].into_iter().map(heat_error).collect();
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let ok = ratios.iter().all(|r| (3.0..=5.0).contains(r));
    check(
        5,
        "heat-equation convergence",
        ok,
        format!(
            "errors {:.2e} {:.2e} {:.2e}, ratios {:.3} {:.3}",
            errors[0], errors[1], errors[2], ratios[0], ratios[1]
        ),
    )
}

/// Per-step invariant margins of one run.
struct InvariantTally {
    steps: u64,
    negative: u64,
    v_violations: u64,
    mass_violations: u64,
    worst_mass_ratio: f64,
    worst_v_ratio: f64,
}

pub fn solution_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let spec = GridSpec::rect([4.0, 4.0], [64, 64]);
    let grid = make_grid(spec).expect("valid grid");
    let mut tally = InvariantTally {
        steps: 0,
        negative: 0,
        v_violations: 0,
        mass_violations: 0,
        worst_mass_ratio: 0.0,
        worst_v_ratio: 0.0,
    };
    let mut incomplete = 0;
    for run_idx in 0..20u64 {
        let params = ModelParams {
            m1: rng.gen_range(0.0..=2.0),
            m2: rng.gen_range(0.0..=1.5),
            chi: rng.gen_range(0.0..3.0),
            lambda: rng.gen_range(0.0..2.0),
            mu: rng.gen_range(0.1..2.0),
            c: rng.gen_range(0.0..2.0),
            gamma: rng.gen_range(1.0..=2.0),
            dim: 2,
        };
        let u0 = InitialCondition::seeded(rng.gen_range(0.5..2.0), 0.5, 1000 + run_idx);
        let v0 = InitialCondition::seeded(1.0, rng.gen_range(0.0..1.0), 2000 + run_idx);
        let initial = init_state(&grid, &u0, &v0).expect("valid initial data");
        let v0_sup = initial.sup_v();
        let mass0 = mass(&initial.u, &grid);
        let bound = mass0.max(params.lambda / params.mu * grid.measure());
        let cfg = SolverConfig {
            t_end: 0.25,
            record_every: 0.05,
            snapshot_every: 1.0,
            ..SolverConfig::default()
        };
        let r = run_observed(&initial, &params, &grid, &cfg, |s| {
            tally.steps += 1;
            if !s.is_nonnegative() {
                tally.negative += 1;
            }
            let v_ratio = s.sup_v() / v0_sup;
            tally.worst_v_ratio = tally.worst_v_ratio.max(v_ratio);
            if s.sup_v() > v0_sup * (1.0 + 1e-12) {
                tally.v_violations += 1;
            }
            let m = mass(&s.u, &grid);
            tally.worst_mass_ratio = tally.worst_mass_ratio.max(m / bound);
            if m > bound * (1.0 + 1e-6) {
                tally.mass_violations += 1;
            }
        });
        if r.outcome != Outcome::Completed {
            incomplete += 1;
        }
    }
    let ok = tally.negative == 0
        && tally.v_violations == 0
        && tally.mass_violations == 0
        && incomplete == 0;
    check(
        6,
        "solution invariants",
        ok,
        format!(
            "20 runs, {} steps, {incomplete} incomplete; negative {} v-max {} mass {}; worst sup v/sup v0 {:.6}, worst mass/bound {:.6}",
            tally.steps,
            tally.negative,
            tally.v_violations,
            tally.mass_violations,
            tally.worst_v_ratio,
            tally.worst_mass_ratio
        ),
    )
}

pub fn boundedness_observation() -> Check {
    let grid = make_grid(GridSpec::rect([4.0, 4.0], [64, 64])).expect("valid grid");
    let params = ModelParams {
        m1: 1.0,
        m2: 1.2,
        chi: 5.0,
        lambda: 1.0,
        mu: 0.1,
        c: 1.0,
        gamma: 1.8,
        dim: 2,
    };
    let initial = init_state(
        &grid,
        &InitialCondition::gaussian(1.0, 4.0),
        &InitialCondition::cosine(1.0, 0.5),
    )
    .expect("valid initial data");
    let case = classify(&params, initial.sup_v(), ScanSettings::default()).case;
    let cfg = SolverConfig {
        t_end: 50.0,
        record_every: 0.5,
        snapshot_every: 50.0,
        ..SolverConfig::default()
    };
    let r = run(&initial, &params, &grid, &cfg);
    let odi = odi_report(&r.series, 0.1);
    let plateau = odi.as_ref().is_ok_and(|o| o.phi_bounded_heuristic);
    let ok = case == RegimeCase::A1 && r.outcome == Outcome::Completed && plateau;
    let phi_sup = odi.map_or(f64::NAN, |o| o.phi_sup);
    check(
        7,
        "boundedness observation",
        ok,
        format!(
            "case {case}, outcome {} at t={}, {} steps, sup u {:.4}, phi sup {phi_sup:.4e}, plateau {plateau}",
            r.outcome,
            r.final_state.t,
            r.accepted_steps,
            r.final_state.sup_u()
        ),
    )
}

pub fn conservation() -> Check {
    let grid = make_grid(GridSpec::rect([1.0, 1.0], [32, 32])).expect("valid grid");
    let params = ModelParams {
        m1: 1.5,
        m2: 1.2,
        chi: 2.0,
        lambda: 0.0,
        mu: 0.0,
        c: 0.0,
        gamma: 2.0,
        dim: 2,
    };
    let mut state = init_state(
        &grid,
        &InitialCondition::gaussian(0.5, 3.0),
        &InitialCondition::seeded(1.0, 0.5, 7),
    )
    .expect("valid initial data");
    let m0 = mass(&state.u, &grid);
    let mut next = state.clone();
    let mut stepper = Stepper::new();
    let mut broke = false;
    for _ in 0..10_000 {
        let dt = stable_dt(&state, &params, &grid, 0.4);
        if stepper
            .advance(&state, &params, &grid, dt, &mut next)
            .is_err()
        {
            broke = true;
            break;
        }
        std::mem::swap(&mut state, &mut next);
    }
    let drift = rel(mass(&state.u, &grid), m0);
    check(
        8,
        "mass conservation",
        !broke && drift <= 1e-10,
        format!(
            "10000 steps to t={:.4}, relative mass drift {drift:.2e}",
            state.t
        ),
    )
}

const SWEEP_SPEC: &str = "\
dim = 2
cells_x = 24
cells_y = 24
extent_x = 2
extent_y = 2
chi = 2
u_kind = seeded_perturbation
u_baseline = 1
u_amplitude = 0.5
u_seed = 42
v_kind = seeded_perturbation
v_baseline = 1
v_amplitude = 0.3
v_seed = 43
t_end = 0.5
record_every = 0.05
snapshot_every = 0.25
sweep.gamma = 1.2, 1.6, 2
sweep.mu = 0.05, 1
";

fn sweep_files(dir: &Path, runs: usize) -> std::io::Result<Vec<Vec<u8>>> {
    let mut files = vec![std::fs::read(dir.join("index.csv"))?];
    for k in 0..runs {
        files.push(std::fs::read(
            dir.join(format!("run_{k:04}/diagnostics.csv")),
        )?);
    }
    Ok(files)
}

pub fn sweep_determinism() -> Check {
    let attempt = || -> Result<(bool, bool, usize), String> {
        let spec = SweepSpec::parse(SWEEP_SPEC).map_err(|e| e.to_string())?;
        let dirs: Vec<tempfile::TempDir> = (0..3)
            .map(|_| tempfile::tempdir())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (dir, jobs) in dirs.iter().zip([1, 4, 4]) {
            run_sweep(&spec, dir.path(), jobs).map_err(|e| e.to_string())?;
        }
        let read =
            |d: &tempfile::TempDir| sweep_files(d.path(), spec.len()).map_err(|e| e.to_string());
        let (a, b, c) = (read(&dirs[0])?, read(&dirs[1])?, read(&dirs[2])?);
        Ok((a == b, b == c, spec.len()))
    };
    match attempt() {
        Ok((jobs_equal, rerun_equal, runs)) => check(
            9,
            "sweep determinism",
            jobs_equal && rerun_equal,
            format!(
                "{runs} runs; jobs 1 vs 4 identical: {jobs_equal}; re-run identical: {rerun_equal}"
            ),
        ),
        Err(e) => check(9, "sweep determinism", false, e),
    }
}

/// All checks in order, each reported as soon as it finishes.
pub fn run_all(mut report: impl FnMut(&Check)) -> Vec<Check> {
    let checks: [fn() -> Check; 9] = [
        exact_constants,
        gradient_inequality_characterization,
        classifier_consistency,
        uniform_logistic,
        heat_convergence,
        solution_invariants,
        boundedness_observation,
        conservation,
        sweep_determinism,
    ];
    checks
        .into_iter()
        .map(|f| {
            let start = std::time::Instant::now();
            let mut c = f();
            c.seconds = start.elapsed().as_secs_f64();
            report(&c);
            c
        })
        .collect()
}
