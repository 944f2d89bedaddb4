//! Norms, the energy functional and boundedness verdicts.
//!
//! The functional tracked along a run is
//!
//! ```text
//! phi(t) = int (u+1)^p + chi^(2p) int |grad v|^(2p)
//! ```
//!
//! and a bounded trajectory should satisfy an absorption inequality
//! `phi' + phi <= C`. Everything below is a pure function of its inputs.

use crate::error::{Error, Result};
use crate::model::{sup, Grid, ModelParams, State};
use crate::solver::stencil::gradient_sq_into;

/// CSV column order of [`DiagnosticsRow`].
pub const CSV_COLUMNS: [&str; 8] = [
    "t",
    "mass_u",
    "sup_u",
    "sup_v",
    "l2_u",
    "grad_v_l2",
    "phi",
    "odi_residual",
];

/// Relative slack on the mass bound.
pub const MASS_BOUND_RTOL: f64 = 1e-6;
/// Relative slack on the signal maximum principle.
pub const V_MAX_RTOL: f64 = 1e-12;
/// Default plateau tolerance of the phi heuristic.
pub const DEFAULT_PLATEAU_TOLERANCE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass_u: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub l2_u: f64,
    pub grad_v_l2: f64,
    pub phi: f64,
    /// Backward-difference estimate of `phi' + phi`; absent on the first row.
    pub odi_residual: Option<f64>,
}

impl DiagnosticsRow {
    pub fn compute(
        state: &State,
        grid: &Grid,
        chi: f64,
        p: f64,
        previous: Option<&DiagnosticsRow>,
    ) -> Self {
        let phi = phi(state, p, chi, grid);
        let odi_residual = previous
            .filter(|prev| state.t > prev.t)
            .map(|prev| (phi - prev.phi) / (state.t - prev.t) + phi);
        Self {
            t: state.t,
            mass_u: mass(&state.u, grid),
            sup_u: sup(&state.u),
            sup_v: sup(&state.v),
            l2_u: lp_norm(&state.u, 2.0, grid),
            grad_v_l2: grad_lq_norm(&state.v, 2.0, grid),
            phi,
            odi_residual,
        }
    }

    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    /// One CSV line in [`CSV_COLUMNS`] order; a missing residual is an empty field.
    pub fn csv_line(&self) -> String {
        let residual = self
            .odi_residual
            .map(|r| format!("{r:e}"))
            .unwrap_or_default();
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.t,
            self.mass_u,
            self.sup_u,
            self.sup_v,
            self.l2_u,
            self.grad_v_l2,
            self.phi,
            residual
        )
    }
}

/// Midpoint quadrature `sum f_i |cell|`.
pub fn mass(field: &[f64], grid: &Grid) -> f64 {
    field.iter().sum::<f64>() * grid.cell_volume()
}

pub fn lp_norm(field: &[f64], p: f64, grid: &Grid) -> f64 {
    let integral: f64 = if p == 1.0 {
        field.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        field.iter().map(|x| x * x).sum()
    } else {
        field.iter().map(|x| x.abs().powf(p)).sum()
    };
    (integral * grid.cell_volume()).powf(1.0 / p)
}

/// `(int |grad v|^q)^(1/q)` with the same gradient stencil the solver uses for
/// the damping term.
pub fn grad_lq_norm(v: &[f64], q: f64, grid: &Grid) -> f64 {
    grad_power_integral(v, q, grid).powf(1.0 / q)
}

/// `int |grad v|^q`.
fn grad_power_integral(v: &[f64], q: f64, grid: &Grid) -> f64 {
    let mut sq = vec![0.0; v.len()];
    gradient_sq_into(v, grid, &mut sq);
    let half = 0.5 * q;
    let sum: f64 = if half == 1.0 {
        sq.iter().sum()
    } else {
        sq.iter().map(|s| s.powf(half)).sum()
    };
    sum * grid.cell_volume()
}

/// The energy functional at exponent `p`.
pub fn phi(state: &State, p: f64, chi: f64, grid: &Grid) -> f64 {
    let density: f64 = state.u.iter().map(|u| (u + 1.0).powf(p)).sum::<f64>() * grid.cell_volume();
    if chi == 0.0 {
        return density;
    }
    density + chi.powf(2.0 * p) * grad_power_integral(&state.v, 2.0 * p, grid)
}

/// Shape of `phi` along a recorded series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdiReport {
    /// `max_k (phi'_k + phi_k)` with `phi'` from centred differences.
    pub c_estimate: f64,
    pub phi_sup: f64,
    /// `max phi` over the later half of the run stays within
    /// `(1 + tolerance)` of `max phi` over the earlier half.
    pub phi_bounded_heuristic: bool,
    pub plateau_tolerance: f64,
}

pub fn odi_report(series: &[DiagnosticsRow], plateau_tolerance: f64) -> Result<OdiReport> {
    let n = series.len();
    if n < 2 {
        return Err(Error::ShortSeries(n));
    }
    let slope = |k: usize| {
        let (lo, hi) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        (series[hi].phi - series[lo].phi) / (series[hi].t - series[lo].t)
    };
    let c_estimate = (0..n)
        .map(|k| slope(k) + series[k].phi)
        .fold(f64::NEG_INFINITY, f64::max);
    let phi_sup = series
        .iter()
        .map(|r| r.phi)
        .fold(f64::NEG_INFINITY, f64::max);

    let t_mid = 0.5 * (series[0].t + series[n - 1].t);
    let (early, late): (Vec<_>, Vec<_>) = series.iter().partition(|r| r.t <= t_mid);
    let max_phi =
        |rows: &[&DiagnosticsRow]| rows.iter().map(|r| r.phi).fold(f64::NEG_INFINITY, f64::max);
    let phi_bounded_heuristic = max_phi(&late) <= (1.0 + plateau_tolerance) * max_phi(&early);

    Ok(OdiReport {
        c_estimate,
        phi_sup,
        phi_bounded_heuristic,
        plateau_tolerance,
    })
}

/// Mass bound check; not applicable without quadratic degradation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MassCheck {
    NotApplicable,
    Checked {
        ok: bool,
        /// `bound - max_row mass_u` (negative when violated).
        worst_margin: f64,
        bound: f64,
    },
}

impl MassCheck {
    /// `None` when the check does not apply.
    pub fn ok(&self) -> Option<bool> {
        match self {
            MassCheck::NotApplicable => None,
            MassCheck::Checked { ok, .. } => Some(*ok),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsCheck {
    pub mass: MassCheck,
    pub v_max_ok: bool,
    /// `v0_sup - max_row sup_v`.
    pub v_worst_margin: f64,
}

/// `max{mass0, (lambda/mu) |Omega|}`, or `None` when `mu = 0`.
pub fn mass_bound(params: &ModelParams, grid: &Grid, mass0: f64) -> Option<f64> {
    (params.mu > 0.0).then(|| mass0.max(params.lambda / params.mu * grid.measure()))
}

pub fn check_bounds(
    series: &[DiagnosticsRow],
    params: &ModelParams,
    grid: &Grid,
    mass0: f64,
    v0_sup: f64,
) -> BoundsCheck {
    let mass = match mass_bound(params, grid, mass0) {
        None => MassCheck::NotApplicable,
        Some(bound) => {
            let worst = series
                .iter()
                .map(|r| r.mass_u)
                .fold(f64::NEG_INFINITY, f64::max);
            MassCheck::Checked {
                ok: series
                    .iter()
                    .all(|r| r.mass_u <= bound * (1.0 + MASS_BOUND_RTOL)),
                worst_margin: bound - worst,
                bound,
            }
        }
    };
    let worst_v = series
        .iter()
        .map(|r| r.sup_v)
        .fold(f64::NEG_INFINITY, f64::max);
    BoundsCheck {
        mass,
        v_max_ok: series
            .iter()
            .all(|r| r.sup_v <= v0_sup * (1.0 + V_MAX_RTOL)),
        v_worst_margin: v0_sup - worst_v,
    }
}

/// Everything a finished run can say about boundedness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundednessVerdict {
    pub bounds: BoundsCheck,
    pub odi: OdiReport,
}

pub fn boundedness_verdict(
    series: &[DiagnosticsRow],
    params: &ModelParams,
    grid: &Grid,
    mass0: f64,
    v0_sup: f64,
    plateau_tolerance: f64,
) -> Result<BoundednessVerdict> {
    Ok(BoundednessVerdict {
        bounds: check_bounds(series, params, grid, mass0, v0_sup),
        odi: odi_report(series, plateau_tolerance)?,
    })
}
