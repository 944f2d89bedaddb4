//! Parameters, mesh and field types for the chemotaxis-consumption system
//!
//! ```text
//! u_t = div((u+1)^(m1-1) grad u - chi u (u+1)^(m2-1) grad v) + lambda u - mu u^2 - c |grad u|^gamma
//! v_t = lap v - u v
//! ```
//!
//! with homogeneous Neumann data on an axis-aligned interval or rectangle.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Coefficients of the system plus the spatial dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Diffusion exponent: diffusivity is `(u+1)^(m1-1)`.
    pub m1: f64,
    /// Sensitivity exponent: mobility is `u (u+1)^(m2-1)`.
    pub m2: f64,
    pub chi: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Gradient damping coefficient.
    pub c: f64,
    /// Gradient damping exponent, in `[1, 2]`.
    pub gamma: f64,
    pub dim: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            chi: 1.0,
            lambda: 1.0,
            mu: 1.0,
            c: 1.0,
            gamma: 2.0,
            dim: 2,
        }
    }
}

/// Outcome of [`ModelParams::validate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Validation {
    /// Human-readable reasons the simulator would refuse these parameters.
    pub violations: Vec<String>,
    /// Whether `lambda`, `mu`, `c`, `chi` are all strictly positive, as the
    /// boundedness theorem assumes.
    pub theorem_strict: bool,
}

impl Validation {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl ModelParams {
    pub fn validate(&self) -> Validation {
        let mut violations = Vec::new();
        for (name, value) in [("m1", self.m1), ("m2", self.m2)] {
            if !value.is_finite() {
                violations.push(format!("{name} must be finite"));
            }
        }
        if !(1.0..=2.0).contains(&self.gamma) {
            violations.push("gamma outside [1,2]".to_string());
        }
        for (name, value) in [
            ("chi", self.chi),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("c", self.c),
        ] {
            if !value.is_finite() || value < 0.0 {
                violations.push(format!("{name} must be finite and >= 0"));
            }
        }
        if self.dim == 0 {
            violations.push("dim must be >= 1".to_string());
        }
        let theorem_strict = self.lambda > 0.0 && self.mu > 0.0 && self.c > 0.0 && self.chi > 0.0;
        Validation {
            violations,
            theorem_strict,
        }
    }
}

/// Requested mesh: per-axis lengths and cell counts. Only the first `dim`
/// entries are read.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub extents: [f64; 2],
    pub cells: [usize; 2],
}

impl GridSpec {
    pub fn line(extent: f64, cells: usize) -> Self {
        Self {
            dim: 1,
            extents: [extent, 1.0],
            cells: [cells, 1],
        }
    }

    pub fn rect(extents: [f64; 2], cells: [usize; 2]) -> Self {
        Self {
            dim: 2,
            extents,
            cells,
        }
    }
}

/// Uniform cell-centred mesh on `[0, Lx]` or `[0, Lx] x [0, Ly]`.
///
/// Storage is row-major with `x` fastest; a 1D grid has a single row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    extents: [f64; 2],
    cells: [usize; 2],
    spacing: [f64; 2],
    cell_volume: f64,
    measure: f64,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if !(1..=2).contains(&spec.dim) {
            return Err(Error::Grid(format!("dim must be 1 or 2, got {}", spec.dim)));
        }
        let mut extents = [1.0; 2];
        let mut cells = [1; 2];
        let mut spacing = [1.0; 2];
        for axis in 0..spec.dim {
            let (extent, n) = (spec.extents[axis], spec.cells[axis]);
            if !(extent.is_finite() && extent > 0.0) {
                return Err(Error::Grid(format!(
                    "extent along axis {axis} must be positive, got {extent}"
                )));
            }
            if n < 3 {
                return Err(Error::Grid(format!(
                    "need at least 3 cells along axis {axis}, got {n}"
                )));
            }
            extents[axis] = extent;
            cells[axis] = n;
            spacing[axis] = extent / n as f64;
        }
        let cell_volume = spacing[..spec.dim].iter().product();
        let measure = extents[..spec.dim].iter().product();
        Ok(Self {
            dim: spec.dim,
            extents,
            cells,
            spacing,
            cell_volume,
            measure,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells along x.
    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    /// Cells along y (1 for a 1D grid).
    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn hx(&self) -> f64 {
        self.spacing[0]
    }

    pub fn hy(&self) -> f64 {
        self.spacing[1]
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// `|Omega|`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn smallest_spacing(&self) -> f64 {
        self.spacing().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Centre coordinate of cell `i` along `axis`.
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing[axis]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            extents: self.extents,
            cells: self.cells,
        }
    }
}

/// The pair `(u, v)` at time `t`, stored cell-wise in [`Grid`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x >= 0.0)
    }

    pub fn sup_u(&self) -> f64 {
        sup(&self.u)
    }

    pub fn sup_v(&self) -> f64 {
        sup(&self.v)
    }
}

/// Largest entry, NaN-propagating (a NaN anywhere makes the result NaN).
pub(crate) fn sup(field: &[f64]) -> f64 {
    field.iter().fold(f64::NEG_INFINITY, |acc, &x| {
        if x.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IcKind {
    Constant,
    /// `baseline + amplitude * prod_axes cos(pi x_a / L_a)`.
    CosineMode,
    /// `baseline + amplitude * prod_axes g(x_a)` with `g` a centred Gaussian
    /// summed with its mirror images, so it is even about both walls.
    GaussianBump,
    /// `baseline + amplitude * r`, `r` uniform in `[-1, 1)` from a seeded ChaCha8 stream.
    SeededPerturbation,
}

impl IcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IcKind::Constant => "constant",
            IcKind::CosineMode => "cosine_mode",
            IcKind::GaussianBump => "gaussian_bump",
            IcKind::SeededPerturbation => "seeded_perturbation",
        }
    }
}

impl fmt::Display for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(IcKind::Constant),
            "cosine_mode" => Ok(IcKind::CosineMode),
            "gaussian_bump" => Ok(IcKind::GaussianBump),
            "seeded_perturbation" => Ok(IcKind::SeededPerturbation),
            other => Err(Error::InitialCondition(format!(
                "unknown kind `{other}` (expected constant, cosine_mode, gaussian_bump or seeded_perturbation)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialCondition {
    pub kind: IcKind,
    pub amplitude: f64,
    pub baseline: f64,
    pub seed: u64,
}

/// Gaussian width as a fraction of the axis length.
const BUMP_WIDTH: f64 = 0.1;

impl InitialCondition {
    pub fn constant(baseline: f64) -> Self {
        Self {
            kind: IcKind::Constant,
            amplitude: 0.0,
            baseline,
            seed: 0,
        }
    }

    pub fn cosine(baseline: f64, amplitude: f64) -> Self {
        Self {
            kind: IcKind::CosineMode,
            amplitude,
            baseline,
            seed: 0,
        }
    }

    pub fn gaussian(baseline: f64, amplitude: f64) -> Self {
        Self {
            kind: IcKind::GaussianBump,
            amplitude,
            baseline,
            seed: 0,
        }
    }

    pub fn seeded(baseline: f64, amplitude: f64, seed: u64) -> Self {
        Self {
            kind: IcKind::SeededPerturbation,
            amplitude,
            baseline,
            seed,
        }
    }

    pub fn check(&self) -> Result<()> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(self.baseline) {
            return Err(Error::InitialCondition(format!(
                "baseline must be finite and >= 0, got {}",
                self.baseline
            )));
        }
        if !finite_nonneg(self.amplitude) {
            return Err(Error::InitialCondition(format!(
                "amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        let signed = matches!(self.kind, IcKind::CosineMode | IcKind::SeededPerturbation);
        if signed && self.amplitude > self.baseline {
            return Err(Error::InitialCondition(format!(
                "{}: amplitude {} exceeds baseline {} (field would go negative)",
                self.kind, self.amplitude, self.baseline
            )));
        }
        Ok(())
    }

    /// Upper bound on the sup of the sampled field, usable without a grid.
    pub fn sup_bound(&self) -> f64 {
        match self.kind {
            IcKind::Constant => self.baseline,
            IcKind::CosineMode | IcKind::SeededPerturbation => self.baseline + self.amplitude,
            IcKind::GaussianBump => self.baseline + self.amplitude * mirrored_gaussian(0.5, 0.5),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check()?;
        let (nx, ny) = (grid.nx(), grid.ny());
        let b = self.baseline;
        let a = self.amplitude;
        let field = match self.kind {
            IcKind::Constant => vec![b; grid.len()],
            IcKind::CosineMode | IcKind::GaussianBump => {
                let profile = |axis: usize, i: usize| {
                    let s = grid.center(axis, i) / grid.extents[axis];
                    match self.kind {
                        IcKind::CosineMode => (std::f64::consts::PI * s).cos(),
                        _ => mirrored_gaussian(s, 0.5),
                    }
                };
                let px: Vec<f64> = (0..nx).map(|i| profile(0, i)).collect();
                let py: Vec<f64> = if grid.dim() == 2 {
                    (0..ny).map(|j| profile(1, j)).collect()
                } else {
                    vec![1.0]
                };
                let mut out = Vec::with_capacity(grid.len());
                for &gy in &py {
                    out.extend(px.iter().map(|&gx| (b + a * gx * gy).max(0.0)));
                }
                out
            }
            IcKind::SeededPerturbation => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..grid.len())
                    .map(|_| {
                        let r: f64 = rng.gen_range(-1.0..1.0);
                        (b + a * r).max(0.0)
                    })
                    .collect()
            }
        };
        Ok(field)
    }
}

/// Unit-height Gaussian on `[0, 1]` centred at `center`, plus its reflections
/// about 0 and 1, so the derivative vanishes at both ends.
fn mirrored_gaussian(s: f64, center: f64) -> f64 {
    let w2 = 2.0 * BUMP_WIDTH * BUMP_WIDTH;
    (-2..=2)
        .flat_map(|k| {
            let shift = 2.0 * k as f64;
            [shift + center, shift - center]
        })
        .map(|c| (-(s - c).powi(2) / w2).exp())
        .sum()
}

pub fn make_grid(spec: GridSpec) -> Result<Grid> {
    Grid::new(spec)
}

/// Samples both initial fields at `t = 0`.
pub fn init_state(grid: &Grid, ic_u: &InitialCondition, ic_v: &InitialCondition) -> Result<State> {
    Ok(State {
        t: 0.0,
        u: ic_u.sample(grid)?,
        v: ic_v.sample(grid)?,
    })
}
