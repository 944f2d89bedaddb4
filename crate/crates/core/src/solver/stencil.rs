//! Finite-volume stencils on the cell-centred grid.
//!
//! Every stencil is written as a loop over interior faces; boundary faces
//! carry zero flux, which is the discrete form of `u_nu = v_nu = 0`.

use crate::model::Grid;

/// Kirchhoff potential `Phi(u)` with `Phi' = (u+1)^(m1-1)` and `Phi(0) = 0`.
#[inline]
pub fn kirchhoff(u: f64, m1: f64) -> f64 {
    if m1 == 1.0 {
        u
    } else if m1 == 0.0 {
        u.ln_1p()
    } else {
        (m1 * u.ln_1p()).exp_m1() / m1
    }
}

/// Diffusivity `(u+1)^(m1-1)`.
#[inline]
pub fn diffusivity(u: f64, m1: f64) -> f64 {
    if m1 == 1.0 {
        1.0
    } else {
        ((m1 - 1.0) * u.ln_1p()).exp()
    }
}

/// Chemotactic mobility `u (u+1)^(m2-1)`.
#[inline]
pub fn mobility(u: f64, m2: f64) -> f64 {
    if m2 == 1.0 {
        u
    } else {
        u * ((m2 - 1.0) * u.ln_1p()).exp()
    }
}

/// Calls `f(a, b, 1/h)` for every interior face, `a` being the lower cell.
#[inline(always)]
pub(crate) fn for_each_face(grid: &Grid, mut f: impl FnMut(usize, usize, f64)) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_hx = 1.0 / grid.hx();
    for j in 0..ny {
        let row = j * nx;
        for i in row..row + nx - 1 {
            f(i, i + 1, inv_hx);
        }
    }
    if grid.dim() == 2 {
        let inv_hy = 1.0 / grid.hy();
        for j in 0..ny - 1 {
            let row = j * nx;
            for i in row..row + nx {
                f(i, i + nx, inv_hy);
            }
        }
    }
}

/// Adds the Neumann Laplacian of `field` into `out`.
pub(crate) fn add_laplacian(field: &[f64], grid: &Grid, out: &mut [f64]) {
    for_each_face(grid, |a, b, inv_h| {
        let flux = (field[b] - field[a]) * inv_h * inv_h;
        out[a] += flux;
        out[b] -= flux;
    });
}

/// Second-order Laplacian with mirrored ghost cells.
pub fn laplacian_neumann(field: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; field.len()];
    add_laplacian(field, grid, &mut out);
    out
}

/// `div(chi M(u) grad v)` with the mobility taken from the upwind cell of each
/// face (the cell the drift leaves). The drift contribution to `u_t` is the
/// negative of this.
pub fn chemotaxis_divergence(u: &[f64], v: &[f64], grid: &Grid, chi: f64, m2: f64) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    if chi == 0.0 {
        return out;
    }
    let mob: Vec<f64> = u.iter().map(|&x| mobility(x, m2)).collect();
    for_each_face(grid, |a, b, inv_h| {
        let dv = v[b] - v[a];
        let up = if dv > 0.0 { mob[a] } else { mob[b] };
        // mass flux from a to b, counted as outflow of a
        let flux = chi * up * dv * inv_h * inv_h;
        out[a] += flux;
        out[b] -= flux;
    });
    out
}

/// Writes `|grad f|^2` per cell into `out` using centred differences with
/// mirrored ghosts: at a wall cell the outward neighbour equals the cell
/// itself, so only the inward half-difference survives.
pub(crate) fn gradient_sq_into(field: &[f64], grid: &Grid, out: &mut [f64]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let sx = 0.5 / grid.hx();
    for j in 0..ny {
        let row = &field[j * nx..(j + 1) * nx];
        let dst = &mut out[j * nx..(j + 1) * nx];
        for i in 0..nx {
            let left = row[i.saturating_sub(1)];
            let right = row[(i + 1).min(nx - 1)];
            let g = (right - left) * sx;
            dst[i] = g * g;
        }
    }
    if grid.dim() == 2 {
        let sy = 0.5 / grid.hy();
        for j in 0..ny {
            let down = j.saturating_sub(1) * nx;
            let up = (j + 1).min(ny - 1) * nx;
            for i in 0..nx {
                let g = (field[up + i] - field[down + i]) * sy;
                out[j * nx + i] += g * g;
            }
        }
    }
}

/// Per-cell `|grad f|`.
pub fn gradient_magnitude(field: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; field.len()];
    gradient_sq_into(field, grid, &mut out);
    for x in &mut out {
        *x = x.sqrt();
    }
    out
}
