//! Property tests of the solution invariants on short random runs.

use chemolab_core::diagnostics::mass;
use chemolab_core::model::{init_state, make_grid, GridSpec, InitialCondition, ModelParams};
use chemolab_core::solver::{run_observed, Outcome, SolverConfig};
use proptest::prelude::*;

fn params(dim: usize) -> impl Strategy<Value = ModelParams> {
    (
        0.0..=2.0f64,
        0.0..=1.5f64,
        0.0..4.0f64,
        0.0..3.0f64,
        0.05..2.0f64,
        0.0..2.0f64,
        1.0..=2.0f64,
    )
        .prop_map(move |(m1, m2, chi, lambda, mu, c, gamma)| ModelParams {
            m1,
            m2,
            chi,
            lambda,
            mu,
            c,
            gamma,
            dim,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_step_respects_the_bounds(
        p in params(2),
        u_base in 0.0..3.0f64,
        v_amp in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        let grid = make_grid(GridSpec::rect([1.0, 1.0], [12, 12])).unwrap();
        let u0 = InitialCondition::seeded(u_base, u_base, seed);
        let v0 = InitialCondition::seeded(1.0, v_amp, seed ^ 1);
        let initial = init_state(&grid, &u0, &v0).unwrap();
        let v_sup = initial.sup_v();
        let bound = mass(&initial.u, &grid).max(p.lambda / p.mu * grid.measure()) * (1.0 + 1e-6);
        let cfg = SolverConfig { t_end: 0.05, record_every: 0.01, ..SolverConfig::default() };
        let mut ok = true;
        let r = run_observed(&initial, &p, &grid, &cfg, |s| {
            ok &= s.is_nonnegative();
            ok &= s.sup_v() <= v_sup * (1.0 + 1e-12);
            ok &= mass(&s.u, &grid) <= bound;
        });
        prop_assert_eq!(r.outcome, Outcome::Completed);
        prop_assert!(ok);
        let times: Vec<f64> = r.series.iter().map(|row| row.t).collect();
        prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.series.iter().all(|row| row.phi.is_finite() && row.mass_u.is_finite()));
    }

    #[test]
    fn pure_transport_conserves_mass(
        m1 in 0.0..=2.0f64,
        m2 in 0.0..=1.5f64,
        chi in 0.0..5.0f64,
        seed in any::<u64>(),
    ) {
        let grid = make_grid(GridSpec::line(1.0, 40)).unwrap();
        let p = ModelParams { m1, m2, chi, lambda: 0.0, mu: 0.0, c: 0.0, gamma: 2.0, dim: 1 };
        let initial = init_state(
            &grid,
            &InitialCondition::seeded(1.0, 1.0, seed),
            &InitialCondition::seeded(1.0, 0.9, seed ^ 7),
        ).unwrap();
        let m0 = mass(&initial.u, &grid);
        let cfg = SolverConfig { t_end: 0.02, record_every: 0.01, ..SolverConfig::default() };
        let r = run_observed(&initial, &p, &grid, &cfg, |_| {});
        let m = mass(&r.final_state.u, &grid);
        prop_assert!((m - m0).abs() <= 1e-12 * m0);
    }
}
