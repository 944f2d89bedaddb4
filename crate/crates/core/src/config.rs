//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment line, blank lines are
//! skipped. Every key is optional and falls back to [`RunConfig::default`].
//! Unknown or repeated keys are errors, and every error carries the line
//! number of the offending key.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::diagnostics::DEFAULT_PLATEAU_TOLERANCE;
use crate::model::{make_grid, Grid, GridSpec, IcKind, InitialCondition, ModelParams};
use crate::regime::{classify, find_p1, RegimeReport, ScanSettings};
use crate::solver::SolverConfig;
use crate::{Error, Result};

/// Keys in serialization order.
pub const KEYS: [&str; 30] = [
    "m1",
    "m2",
    "chi",
    "lambda",
    "mu",
    "c",
    "gamma",
    "dim",
    "extent_x",
    "extent_y",
    "cells_x",
    "cells_y",
    "u_kind",
    "u_amplitude",
    "u_baseline",
    "u_seed",
    "v_kind",
    "v_amplitude",
    "v_baseline",
    "v_seed",
    "cfl_safety",
    "t_end",
    "max_steps",
    "blowup_cap",
    "snapshot_every",
    "record_every",
    "diag_p",
    "plateau_tolerance",
    "p_scan_max",
    "p_scan_samples",
];

/// Largest energy exponent picked automatically.
pub const DIAG_P_CAP: f64 = 6.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub u0: InitialCondition,
    pub v0: InitialCondition,
    pub solver: SolverConfig,
    /// `None` means "derive from the regime scan".
    pub diag_p: Option<f64>,
    pub plateau_tolerance: f64,
    pub scan: ScanSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            grid: GridSpec::rect([1.0, 1.0], [64, 64]),
            u0: InitialCondition::cosine(1.0, 0.5),
            v0: InitialCondition::constant(1.0),
            solver: SolverConfig::default(),
            diag_p: None,
            plateau_tolerance: DEFAULT_PLATEAU_TOLERANCE,
            scan: ScanSettings::default(),
        }
    }
}

/// Where each key was set, for attributing validation errors.
type Lines = HashMap<&'static str, usize>;

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::config(line, format!("{key}: expected a number, got `{raw}`")))
}

fn parse_usize(line: usize, key: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| {
        Error::config(
            line,
            format!("{key}: expected a nonnegative integer, got `{raw}`"),
        )
    })
}

fn parse_u64(line: usize, key: &str, raw: &str) -> Result<u64> {
    raw.parse::<u64>().map_err(|_| {
        Error::config(
            line,
            format!("{key}: expected a nonnegative integer, got `{raw}`"),
        )
    })
}

/// Splits `key = value`, dropping blank and comment lines.
pub(crate) fn split_assignment(raw: &str) -> Option<std::result::Result<(&str, &str), ()>> {
    let text = raw.trim();
    if text.is_empty() || text.starts_with('#') {
        return None;
    }
    Some(match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim(), v.trim())),
        _ => Err(()),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut lines = Lines::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            match split_assignment(raw) {
                None => {}
                Some(Err(())) => {
                    return Err(Error::config(
                        line,
                        format!("expected `key = value`, got `{}`", raw.trim()),
                    ))
                }
                Some(Ok((key, value))) => cfg.set(line, key, value, &mut lines)?,
            }
        }
        cfg.validate(&lines)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies one assignment; `lines` detects duplicates.
    pub(crate) fn set(
        &mut self,
        line: usize,
        key: &str,
        value: &str,
        lines: &mut Lines,
    ) -> Result<()> {
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::config(line, format!("unknown key `{key}`")));
        };
        if let Some(first) = lines.insert(known, line) {
            return Err(Error::config(
                line,
                format!("duplicate key `{key}` (first set on line {first})"),
            ));
        }
        let f = || parse_f64(line, key, value);
        let kind = || {
            value
                .parse::<IcKind>()
                .map_err(|e| Error::config(line, format!("{key}: {e}")))
        };
        match known {
            "m1" => self.params.m1 = f()?,
            "m2" => self.params.m2 = f()?,
            "chi" => self.params.chi = f()?,
            "lambda" => self.params.lambda = f()?,
            "mu" => self.params.mu = f()?,
            "c" => self.params.c = f()?,
            "gamma" => self.params.gamma = f()?,
            "dim" => self.params.dim = parse_usize(line, key, value)?,
            "extent_x" => self.grid.extents[0] = f()?,
            "extent_y" => self.grid.extents[1] = f()?,
            "cells_x" => self.grid.cells[0] = parse_usize(line, key, value)?,
            "cells_y" => self.grid.cells[1] = parse_usize(line, key, value)?,
            "u_kind" => self.u0.kind = kind()?,
            "u_amplitude" => self.u0.amplitude = f()?,
            "u_baseline" => self.u0.baseline = f()?,
            "u_seed" => self.u0.seed = parse_u64(line, key, value)?,
            "v_kind" => self.v0.kind = kind()?,
            "v_amplitude" => self.v0.amplitude = f()?,
            "v_baseline" => self.v0.baseline = f()?,
            "v_seed" => self.v0.seed = parse_u64(line, key, value)?,
            "cfl_safety" => self.solver.cfl_safety = f()?,
            "t_end" => self.solver.t_end = f()?,
            "max_steps" => self.solver.max_steps = parse_u64(line, key, value)?,
            "blowup_cap" => self.solver.blowup_cap = f()?,
            "snapshot_every" => self.solver.snapshot_every = f()?,
            "record_every" => self.solver.record_every = f()?,
            "diag_p" => self.diag_p = Some(f()?),
            "plateau_tolerance" => self.plateau_tolerance = f()?,
            "p_scan_max" => self.scan.p_scan_max = f()?,
            "p_scan_samples" => self.scan.samples = parse_usize(line, key, value)?,
            _ => unreachable!("key list and match arms disagree"),
        }
        Ok(())
    }

    /// Cross-field checks; errors point at the line of the first key involved.
    pub(crate) fn validate(&mut self, lines: &Lines) -> Result<()> {
        let at = |keys: &[&str]| keys.iter().find_map(|k| lines.get(k).copied()).unwrap_or(0);

        self.grid.dim = self.params.dim;
        let v = self.params.validate();
        if let Some(msg) = v.violations.first() {
            let key = msg.split_whitespace().next().unwrap_or("dim");
            return Err(Error::config(at(&[key]), msg.clone()));
        }
        // higher dimensions are accepted for classification only
        if self.params.dim <= 2 {
            Grid::new(self.grid).map_err(|e| {
                Error::config(
                    at(&["cells_x", "cells_y", "extent_x", "extent_y", "dim"]),
                    e.to_string(),
                )
            })?;
        }
        self.u0.check().map_err(|e| {
            Error::config(at(&["u_amplitude", "u_baseline", "u_kind"]), e.to_string())
        })?;
        self.v0.check().map_err(|e| {
            Error::config(at(&["v_amplitude", "v_baseline", "v_kind"]), e.to_string())
        })?;
        let mut solver = self.solver;
        solver.diag_p = self.diag_p.unwrap_or(2.0);
        solver.check().map_err(|msg| {
            let key = [
                "cfl_safety",
                "t_end",
                "max_steps",
                "blowup_cap",
                "snapshot_every",
                "record_every",
                "diag_p",
            ]
            .into_iter()
            .find(|k| msg.starts_with(k))
            .unwrap_or("t_end");
            Error::config(at(&[key, "t_end", "record_every", "snapshot_every"]), msg)
        })?;
        if !(self.plateau_tolerance.is_finite() && self.plateau_tolerance >= 0.0) {
            return Err(Error::config(
                at(&["plateau_tolerance"]),
                format!(
                    "plateau_tolerance must be finite and >= 0, got {}",
                    self.plateau_tolerance
                ),
            ));
        }
        if !(self.scan.p_scan_max.is_finite() && self.scan.p_scan_max > 1.001) {
            return Err(Error::config(
                at(&["p_scan_max"]),
                format!("p_scan_max must exceed 1.001, got {}", self.scan.p_scan_max),
            ));
        }
        if self.scan.samples < 2 {
            return Err(Error::config(
                at(&["p_scan_samples"]),
                "p_scan_samples must be >= 2",
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.grid)
    }

    /// `sup v0` of the sampled field, or the analytic bound when the
    /// dimension has no grid.
    pub fn v0_sup(&self) -> Result<f64> {
        if self.params.dim > 2 {
            return Ok(self.v0.sup_bound());
        }
        let v = self.v0.sample(&self.grid()?)?;
        Ok(v.iter().copied().fold(0.0, f64::max))
    }

    pub fn regime(&self) -> Result<RegimeReport> {
        Ok(classify(&self.params, self.v0_sup()?, self.scan))
    }

    /// Energy exponent: the configured one, else `max(2, ceil(p1))` capped at 6.
    pub fn effective_diag_p(&self) -> f64 {
        self.diag_p.unwrap_or_else(|| {
            let p = &self.params;
            find_p1(
                p.gamma,
                p.m1,
                p.m2,
                p.dim,
                self.scan.p_scan_max,
                self.scan.samples,
            )
            .map_or(2.0, |p1| p1.ceil().clamp(2.0, DIAG_P_CAP))
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            diag_p: self.effective_diag_p(),
            ..self.solver
        }
    }

    /// Canonical text: every key, fixed order, shortest round-trip numbers.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("m1", p.m1.to_string());
        kv("m2", p.m2.to_string());
        kv("chi", p.chi.to_string());
        kv("lambda", p.lambda.to_string());
        kv("mu", p.mu.to_string());
        kv("c", p.c.to_string());
        kv("gamma", p.gamma.to_string());
        kv("dim", p.dim.to_string());
        kv("extent_x", self.grid.extents[0].to_string());
        kv("extent_y", self.grid.extents[1].to_string());
        kv("cells_x", self.grid.cells[0].to_string());
        kv("cells_y", self.grid.cells[1].to_string());
        for (prefix, ic) in [("u", &self.u0), ("v", &self.v0)] {
            kv(&format!("{prefix}_kind"), ic.kind.to_string());
            kv(&format!("{prefix}_amplitude"), ic.amplitude.to_string());
            kv(&format!("{prefix}_baseline"), ic.baseline.to_string());
            kv(&format!("{prefix}_seed"), ic.seed.to_string());
        }
        let sv = &self.solver;
        kv("cfl_safety", sv.cfl_safety.to_string());
        kv("t_end", sv.t_end.to_string());
        kv("max_steps", sv.max_steps.to_string());
        kv("blowup_cap", sv.blowup_cap.to_string());
        kv("snapshot_every", sv.snapshot_every.to_string());
        kv("record_every", sv.record_every.to_string());
        if let Some(d) = self.diag_p {
            kv("diag_p", d.to_string());
        }
        kv("plateau_tolerance", self.plateau_tolerance.to_string());
        kv("p_scan_max", self.scan.p_scan_max.to_string());
        kv("p_scan_samples", self.scan.samples.to_string());
        s
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.serialize().as_bytes()))
    }
}
