//! Running a configuration and writing its artifacts.
//!
//! A run directory holds
//!
//! * `config.txt`: the canonical configuration echo,
//! * `diagnostics.csv`: one row per recorded time,
//! * `snapshots/NNNN_u.txt`, `snapshots/NNNN_v.txt`: full fields,
//! * `summary.txt`: outcome, step counts, verdicts and wall time.
//!
//! Every file starts with `#` metadata lines naming the tool version, the
//! configuration hash and the file's column schema.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::config::RunConfig;
use crate::diagnostics::{boundedness_verdict, BoundednessVerdict, DiagnosticsRow, CSV_COLUMNS};
use crate::model::{init_state, Grid, State};
use crate::regime::RegimeReport;
use crate::solver::{run, RunResult};
use crate::{Error, Result};

pub const TOOL: &str = concat!("chemolab ", env!("CARGO_PKG_VERSION"));

/// Everything produced by one configured run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub config: RunConfig,
    pub grid: Grid,
    pub regime: RegimeReport,
    pub result: RunResult,
    /// `None` when the series is too short for the ODI report.
    pub verdict: Option<BoundednessVerdict>,
    pub wall: Duration,
}

/// Builds the grid and initial state from `cfg` and integrates.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    let grid = cfg.grid()?;
    let initial = init_state(&grid, &cfg.u0, &cfg.v0)?;
    let regime = cfg.regime()?;
    let solver = cfg.solver_config();
    let start = Instant::now();
    let result = run(&initial, &cfg.params, &grid, &solver);
    let wall = start.elapsed();
    let mass0 = result.series[0].mass_u;
    let v0_sup = initial.sup_v();
    let verdict = boundedness_verdict(
        &result.series,
        &cfg.params,
        &grid,
        mass0,
        v0_sup,
        cfg.plateau_tolerance,
    )
    .ok();
    Ok(Simulation {
        config: cfg.clone(),
        grid,
        regime,
        result,
        verdict,
        wall,
    })
}

/// `#` metadata block shared by every output file.
pub fn metadata_header(cfg: &RunConfig, columns: &str) -> String {
    let solver = cfg.solver_config();
    format!(
        "# tool={TOOL}\n# config_hash={}\n# columns={columns}\n# record_every={}\n# diag_p={}\n",
        cfg.hash(),
        solver.record_every,
        solver.diag_p,
    )
}

pub fn diagnostics_csv(cfg: &RunConfig, series: &[DiagnosticsRow]) -> String {
    let mut s = metadata_header(cfg, &CSV_COLUMNS.join(","));
    s.push_str(&DiagnosticsRow::csv_header());
    s.push('\n');
    for row in series {
        s.push_str(&row.csv_line());
        s.push('\n');
    }
    s
}

/// One field of a snapshot: header lines, then one text row per grid row,
/// 17 significant digits.
pub fn snapshot_text(cfg: &RunConfig, grid: &Grid, state: &State, field: &str) -> String {
    let values = if field == "u" { &state.u } else { &state.v };
    let mut s = metadata_header(cfg, "row-major field values");
    let _ = writeln!(s, "dim {}", grid.dim());
    let cells: Vec<String> = grid.cells().iter().map(usize::to_string).collect();
    let _ = writeln!(s, "cells {}", cells.join(" "));
    let _ = writeln!(s, "t {:e}", state.t);
    let _ = writeln!(s, "field {field}");
    for row in values.chunks(grid.nx()) {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn summary_text(sim: &Simulation) -> String {
    let mut s = metadata_header(&sim.config, "key=value");
    let r = &sim.result;
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("outcome", r.outcome.to_string());
    kv("t_final", format!("{:e}", r.final_state.t));
    kv("accepted_steps", r.accepted_steps.to_string());
    kv("rejected_steps", r.rejected_steps.to_string());
    kv("final_sup_u", format!("{:e}", r.final_state.sup_u()));
    kv("case", sim.regime.case.to_string());
    match &sim.verdict {
        Some(v) => {
            let mass = v
                .bounds
                .mass
                .ok()
                .map_or("na".to_string(), |ok| ok.to_string());
            kv("mass_bound_ok", mass);
            kv("v_max_ok", v.bounds.v_max_ok.to_string());
            kv("phi_sup", format!("{:e}", v.odi.phi_sup));
            kv("c_estimate", format!("{:e}", v.odi.c_estimate));
            kv(
                "phi_bounded_heuristic",
                v.odi.phi_bounded_heuristic.to_string(),
            );
        }
        None => kv("phi_bounded_heuristic", "na".into()),
    }
    kv("wall_seconds", format!("{:.3}", sim.wall.as_secs_f64()));
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes the whole run directory.
pub fn write_run(dir: &Path, sim: &Simulation) -> Result<()> {
    let snaps = dir.join("snapshots");
    create_dir(&snaps)?;
    let cfg = &sim.config;
    let mut echo = metadata_header(cfg, "key = value");
    echo.push_str(&cfg.serialize());
    write(&dir.join("config.txt"), &echo)?;
    write(
        &dir.join("diagnostics.csv"),
        &diagnostics_csv(cfg, &sim.result.series),
    )?;
    for (k, state) in sim.result.snapshots.iter().enumerate() {
        for field in ["u", "v"] {
            let text = snapshot_text(cfg, &sim.grid, state, field);
            write(&snaps.join(format!("{k:04}_{field}.txt")), &text)?;
        }
    }
    write(&dir.join("summary.txt"), &summary_text(sim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Outcome;

    fn small() -> RunConfig {
        RunConfig::parse(
            "dim = 1\ncells_x = 16\nt_end = 0.05\nrecord_every = 0.01\nsnapshot_every = 0.02\n",
        )
        .unwrap()
    }

    #[test]
    fn run_directory_layout() {
        let cfg = small();
        let sim = simulate(&cfg).unwrap();
        assert_eq!(sim.result.outcome, Outcome::Completed);
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &sim).unwrap();

        let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert!(csv.starts_with(&format!("# tool={TOOL}\n# config_hash={}\n", cfg.hash())));
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], CSV_COLUMNS.join(","));
        assert_eq!(data.len(), 1 + 6);

        // t = 0, 0.02, 0.04 and the final state
        let names: Vec<_> = fs::read_dir(dir.path().join("snapshots"))
            .unwrap()
            .collect();
        assert_eq!(names.len(), 8);

        let snap = fs::read_to_string(dir.path().join("snapshots/0000_u.txt")).unwrap();
        let body: Vec<&str> = snap.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(&body[..4], &["dim 1", "cells 16", "t 0e0", "field u"]);
        let values: Vec<f64> = body[4].split(' ').map(|x| x.parse().unwrap()).collect();
        assert_eq!(values, sim.result.snapshots[0].u);

        let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(summary.contains("outcome=completed\n"));

        let echo = fs::read_to_string(dir.path().join("config.txt")).unwrap();
        assert_eq!(RunConfig::parse(&echo).unwrap(), cfg);
    }

    #[test]
    fn snapshot_rows_follow_the_grid() {
        let cfg = RunConfig::parse("cells_x = 5\ncells_y = 3\nt_end = 0.01\nrecord_every = 0.01")
            .unwrap();
        let grid = cfg.grid().unwrap();
        let state = init_state(&grid, &cfg.u0, &cfg.v0).unwrap();
        let text = snapshot_text(&cfg, &grid, &state, "v");
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[1], "cells 5 3");
        assert_eq!(body.len(), 4 + 3);
        assert!(body[4..].iter().all(|r| r.split(' ').count() == 5));
    }
}
