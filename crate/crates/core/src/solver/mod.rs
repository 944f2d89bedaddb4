//! Explicit finite-volume integrator for the coupled system.
//!
//! One step does, in order:
//!
//! 1. conservative transport of `u` (Kirchhoff-form diffusion `lap Phi(u)`
//!    plus upwinded chemotactic drift), explicit under the CFL limit of
//!    [`stable_dt`], which keeps `u + dt T(u)` nonnegative;
//! 2. a Patankar update of the local kinetics on the transported value `w`:
//!    `u' = w (1 + dt lambda) / (1 + dt (mu w + c |grad u|^gamma / max(w, floor)))`;
//! 3. `v' = (v + dt lap v) / (1 + dt u)`, which is nonnegative and cannot
//!    raise `max v`.
//!
//! Transport never goes through the Patankar weights, so with
//! `lambda = mu = c = 0` the total mass only changes by rounding.

pub mod stencil;

use std::fmt;

use crate::diagnostics::DiagnosticsRow;
use crate::model::{sup, Grid, ModelParams, State};
use stencil::{for_each_face, gradient_sq_into, kirchhoff, mobility};

/// Floor on the denominator of the Patankar weight.
pub const PATANKAR_FLOOR: f64 = 1e-30;

/// Maximum number of consecutive step halvings before a step counts as a breakdown.
const MAX_HALVINGS: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub cfl_safety: f64,
    pub t_end: f64,
    pub max_steps: u64,
    /// `sup u` above this counts as blow-up.
    pub blowup_cap: f64,
    pub snapshot_every: f64,
    pub record_every: f64,
    /// Exponent of the energy functional.
    pub diag_p: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl_safety: 0.4,
            t_end: 1.0,
            max_steps: 50_000_000,
            blowup_cap: 1e6,
            snapshot_every: 1.0,
            record_every: 0.01,
            diag_p: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<(), String> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {x}"))
            }
        };
        positive("cfl_safety", self.cfl_safety)?;
        if self.cfl_safety > 1.0 {
            return Err(format!("cfl_safety must be <= 1, got {}", self.cfl_safety));
        }
        positive("t_end", self.t_end)?;
        positive("blowup_cap", self.blowup_cap)?;
        positive("snapshot_every", self.snapshot_every)?;
        positive("record_every", self.record_every)?;
        if self.record_every > self.t_end {
            return Err(format!(
                "record_every {} exceeds t_end {}",
                self.record_every, self.t_end
            ));
        }
        if !(self.diag_p > 1.0 && self.diag_p.is_finite()) {
            return Err(format!("diag_p must be > 1, got {}", self.diag_p));
        }
        if self.max_steps == 0 {
            return Err("max_steps must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Completed,
    BlowupDetected,
    StepLimit,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::BlowupDetected => "blowup_detected",
            Outcome::StepLimit => "step_limit",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    /// Last accepted state.
    pub final_state: State,
    /// Recorded diagnostics. After a blow-up the last row describes the
    /// offending (rejected) state.
    pub series: Vec<DiagnosticsRow>,
    /// States at `t = 0`, every `snapshot_every`, and at the end.
    pub snapshots: Vec<State>,
    pub outcome: Outcome,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

/// A step whose output is not finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonFiniteStep;

impl fmt::Display for NonFiniteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("step produced non-finite values")
    }
}

impl std::error::Error for NonFiniteStep {}

/// Largest explicit step for the current state:
/// `cfl_safety / (D_max sum_a 2/h_a^2 + sum_a 2 s_a / h_a)`, where `D_max`
/// bounds the diffusivity and `s_a` the drift speed across faces normal to
/// axis `a`. With `chi = 0` and `m1 <= 1` this is `cfl_safety h^2 / (2 dim)`.
pub fn stable_dt(state: &State, params: &ModelParams, grid: &Grid, cfl_safety: f64) -> f64 {
    let sup_u = sup(&state.u).max(0.0);
    let d_max = if params.m1 > 1.0 {
        (sup_u + 1.0).powf(params.m1 - 1.0)
    } else {
        1.0
    };
    let mut rate: f64 = grid.spacing().iter().map(|h| 2.0 * d_max / (h * h)).sum();
    if params.chi > 0.0 {
        let mob_factor = if params.m2 > 1.0 {
            (sup_u + 1.0).powf(params.m2 - 1.0)
        } else {
            1.0
        };
        let mut max_dv = [0.0f64; 2];
        for_each_face(grid, |a, b, _| {
            // x faces join consecutive cells
            let axis = usize::from(b - a != 1);
            max_dv[axis] = max_dv[axis].max((state.v[b] - state.v[a]).abs());
        });
        for (axis, h) in grid.spacing().iter().enumerate() {
            let speed = params.chi * mob_factor * max_dv[axis] / h;
            rate += 2.0 * speed / h;
        }
    }
    cfl_safety / rate
}

/// Reusable buffers for [`Stepper::advance`].
#[derive(Clone, Debug, Default)]
pub struct Stepper {
    potential: Vec<f64>,
    mob: Vec<f64>,
    transport: Vec<f64>,
    lap_v: Vec<f64>,
    grad_sq: Vec<f64>,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes the state at `state.t + dt` into `out`.
    pub fn advance(
        &mut self,
        state: &State,
        params: &ModelParams,
        grid: &Grid,
        dt: f64,
        out: &mut State,
    ) -> Result<(), NonFiniteStep> {
        let n = state.u.len();
        let u = &state.u;
        let v = &state.v;
        for buf in [&mut self.transport, &mut self.lap_v] {
            buf.clear();
            buf.resize(n, 0.0);
        }

        let potential: &[f64] = if params.m1 == 1.0 {
            u
        } else {
            self.potential.clear();
            self.potential
                .extend(u.iter().map(|&x| kirchhoff(x, params.m1)));
            &self.potential
        };
        let transport = &mut self.transport;
        let lap_v = &mut self.lap_v;

        if params.chi > 0.0 {
            let mob: &[f64] = if params.m2 == 1.0 {
                u
            } else {
                self.mob.clear();
                self.mob.extend(u.iter().map(|&x| mobility(x, params.m2)));
                &self.mob
            };
            let chi = params.chi;
            for_each_face(grid, |a, b, inv_h| {
                let inv_h2 = inv_h * inv_h;
                let dv = v[b] - v[a];
                let up = if dv > 0.0 { mob[a] } else { mob[b] };
                // net mass flux a -> b
                let flux = (chi * up * dv - (potential[b] - potential[a])) * inv_h2;
                transport[a] -= flux;
                transport[b] += flux;
                let gv = dv * inv_h2;
                lap_v[a] += gv;
                lap_v[b] -= gv;
            });
        } else {
            for_each_face(grid, |a, b, inv_h| {
                let inv_h2 = inv_h * inv_h;
                let flux = (potential[b] - potential[a]) * inv_h2;
                transport[a] += flux;
                transport[b] -= flux;
                let gv = (v[b] - v[a]) * inv_h2;
                lap_v[a] += gv;
                lap_v[b] -= gv;
            });
        }

        let damping = params.c > 0.0;
        if damping {
            self.grad_sq.resize(n, 0.0);
            gradient_sq_into(u, grid, &mut self.grad_sq);
        }
        let half_gamma = 0.5 * params.gamma;
        let growth = 1.0 + dt * params.lambda;

        out.u.resize(n, 0.0);
        out.v.resize(n, 0.0);
        let mut finite = true;
        for k in 0..n {
            let w = u[k] + dt * self.transport[k];
            let mut sink = dt * params.mu * w;
            if damping {
                let g2 = self.grad_sq[k];
                let g = if half_gamma == 1.0 {
                    g2
                } else if half_gamma == 0.5 {
                    g2.sqrt()
                } else {
                    g2.powf(half_gamma)
                };
                sink += dt * params.c * g / w.max(PATANKAR_FLOOR);
            }
            let un = w * growth / (1.0 + sink);
            let vn = (v[k] + dt * self.lap_v[k]) / (1.0 + dt * u[k]);
            finite &= un.is_finite() && vn.is_finite();
            out.u[k] = un;
            out.v[k] = vn;
        }
        out.t = state.t + dt;
        if finite {
            Ok(())
        } else {
            Err(NonFiniteStep)
        }
    }
}

/// One step of size `dt`.
pub fn step(
    state: &State,
    params: &ModelParams,
    grid: &Grid,
    dt: f64,
) -> Result<State, NonFiniteStep> {
    let mut out = State {
        t: state.t,
        u: Vec::new(),
        v: Vec::new(),
    };
    Stepper::new().advance(state, params, grid, dt, &mut out)?;
    Ok(out)
}

/// Integrates to `cfg.t_end`; see [`run_observed`].
pub fn run(initial: &State, params: &ModelParams, grid: &Grid, cfg: &SolverConfig) -> RunResult {
    run_observed(initial, params, grid, cfg, |_| {})
}

/// Periodic event times `k * every` hit exactly by the step clipping.
struct Cadence {
    every: f64,
    k: u64,
}

impl Cadence {
    fn new(every: f64) -> Self {
        Self { every, k: 1 }
    }

    fn next(&self) -> f64 {
        self.k as f64 * self.every
    }

    /// Advances past `t`; returns whether an event fell due.
    fn fire(&mut self, t: f64) -> bool {
        let mut due = false;
        while self.next() <= t * (1.0 + 1e-12) {
            self.k += 1;
            due = true;
        }
        due
    }
}

/// Integrates with adaptive explicit steps until `t_end`, blow-up, or
/// `max_steps`, calling `observer` on every accepted state.
///
/// A candidate step is retried at half the size if it produces a negative
/// entry or raises `max v`; both are impossible in exact arithmetic under the
/// CFL limit, so retries only absorb rounding.
pub fn run_observed(
    initial: &State,
    params: &ModelParams,
    grid: &Grid,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&State),
) -> RunResult {
    let mut state = initial.clone();
    let mut candidate = initial.clone();
    let mut stepper = Stepper::new();
    let row = |s: &State, prev: Option<&DiagnosticsRow>| {
        DiagnosticsRow::compute(s, grid, params.chi, cfg.diag_p, prev)
    };

    let mut series = vec![row(&state, None)];
    let mut snapshots = vec![state.clone()];
    let mut records = Cadence::new(cfg.record_every);
    let mut snaps = Cadence::new(cfg.snapshot_every);
    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let mut outcome = Outcome::Completed;
    let t_end = cfg.t_end;
    let t_eps = 1e-12 * t_end;

    if !state.is_finite() || state.sup_u() > cfg.blowup_cap {
        outcome = Outcome::BlowupDetected;
    }

    while outcome == Outcome::Completed && state.t < t_end - t_eps {
        if accepted >= cfg.max_steps {
            outcome = Outcome::StepLimit;
            break;
        }
        let target = t_end.min(records.next()).min(snaps.next());
        let mut dt = stable_dt(&state, params, grid, cfg.cfl_safety);
        let mut clipped = false;
        if state.t + dt >= target - t_eps {
            dt = target - state.t;
            clipped = true;
        }
        let sup_v = state.sup_v();
        let mut halvings = 0;
        loop {
            let finite = stepper
                .advance(&state, params, grid, dt, &mut candidate)
                .is_ok();
            if clipped {
                candidate.t = target;
            }
            if !finite || candidate.sup_u() > cfg.blowup_cap {
                outcome = Outcome::BlowupDetected;
                break;
            }
            let sane = candidate.is_nonnegative() && candidate.sup_v() <= sup_v;
            if sane {
                break;
            }
            rejected += 1;
            halvings += 1;
            if halvings > MAX_HALVINGS {
                outcome = Outcome::BlowupDetected;
                break;
            }
            dt *= 0.5;
            clipped = false;
        }
        if outcome == Outcome::BlowupDetected {
            let prev = series.last().copied();
            series.push(row(&candidate, prev.as_ref()));
            break;
        }

        std::mem::swap(&mut state, &mut candidate);
        accepted += 1;
        observer(&state);

        if records.fire(state.t) || state.t >= t_end - t_eps {
            let prev = series.last().copied();
            if prev.is_none_or(|p| state.t > p.t) {
                series.push(row(&state, prev.as_ref()));
            }
        }
        if snaps.fire(state.t) {
            snapshots.push(state.clone());
        }
    }

    if outcome != Outcome::BlowupDetected && series.last().is_some_and(|r| r.t < state.t) {
        let prev = series.last().copied();
        series.push(row(&state, prev.as_ref()));
    }
    if snapshots.last().is_some_and(|s| s.t < state.t) {
        snapshots.push(state.clone());
    }

    RunResult {
        final_state: state,
        series,
        snapshots,
        outcome,
        accepted_steps: accepted,
        rejected_steps: rejected,
    }
}
