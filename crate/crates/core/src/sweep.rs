//! Parameter sweeps over the Cartesian product of per-key value lists.
//!
//! A sweep spec is a run configuration plus lines of the form
//!
//! ```text
//! sweep.gamma = 1.2, 1.6, 2
//! ```
//!
//! Runs are numbered in product order, the last `sweep.` key varying
//! fastest. Each run writes `run_NNNN/` under the output directory and one
//! row of `index.csv`. The index only holds deterministic quantities, so it
//! is byte-identical across re-runs and thread counts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{split_assignment, RunConfig};
use crate::output::{create_dir, simulate, write_run, TOOL};
use crate::{Error, Result};

const PREFIX: &str = "sweep.";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub line: usize,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Non-sweep assignments as `(line, key, value)`.
    base: Vec<(usize, String, String)>,
    pub axes: Vec<SweepAxis>,
    hash: String,
}

/// Outcome of one sweep member, as written to the index.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    pub values: Vec<String>,
    pub case: String,
    pub outcome: String,
    pub final_sup_u: Option<f64>,
    pub phi_plateau: Option<bool>,
    pub error: Option<String>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut base = Vec::new();
        let mut axes: Vec<SweepAxis> = Vec::new();
        let mut scratch = RunConfig::default();
        let mut seen = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let (key, value) = match split_assignment(raw) {
                None => continue,
                Some(Err(())) => {
                    return Err(Error::config(
                        line,
                        format!("expected `key = value`, got `{}`", raw.trim()),
                    ))
                }
                Some(Ok(kv)) => kv,
            };
            match key.strip_prefix(PREFIX) {
                Some(swept) => {
                    let values: Vec<String> =
                        value.split(',').map(|v| v.trim().to_string()).collect();
                    if values.iter().any(String::is_empty) {
                        return Err(Error::config(line, format!("{key}: empty value in list")));
                    }
                    // type-check every value now so bad lists fail before any run
                    for v in &values {
                        scratch.set(line, swept, v, &mut HashMap::new())?;
                    }
                    check_repeat(&mut seen, swept, line)?;
                    axes.push(SweepAxis {
                        key: swept.to_string(),
                        line,
                        values,
                    });
                }
                None => {
                    scratch.set(line, key, value, &mut HashMap::new())?;
                    check_repeat(&mut seen, key, line)?;
                    base.push((line, key.to_string(), value.to_string()));
                }
            }
        }
        Ok(Self {
            base,
            axes,
            hash: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Swept values of run `index`, one per axis.
    pub fn values(&self, mut index: usize) -> Vec<String> {
        let mut out = vec![String::new(); self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let n = axis.values.len();
            *slot = axis.values[index % n].clone();
            index /= n;
        }
        out
    }

    /// Configuration of run `index`; validation errors carry spec line numbers.
    pub fn config(&self, index: usize) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut lines = HashMap::new();
        for (line, key, value) in &self.base {
            cfg.set(*line, key, value, &mut lines)?;
        }
        for (axis, value) in self.axes.iter().zip(self.values(index)) {
            cfg.set(axis.line, &axis.key, &value, &mut lines)?;
        }
        cfg.validate(&lines)?;
        Ok(cfg)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }
}

fn check_repeat(seen: &mut HashMap<String, usize>, key: &str, line: usize) -> Result<()> {
    match seen.insert(key.to_string(), line) {
        Some(first) => Err(Error::config(
            line,
            format!("duplicate key `{key}` (first set on line {first})"),
        )),
        None => Ok(()),
    }
}

fn execute(spec: &SweepSpec, index: usize, out: &Path) -> RunRecord {
    let mut record = RunRecord {
        index,
        values: spec.values(index),
        case: "na".into(),
        outcome: "error".into(),
        final_sup_u: None,
        phi_plateau: None,
        error: None,
    };
    let dir = out.join(format!("run_{index:04}"));
    let attempt = spec.config(index).and_then(|cfg| {
        let sim = simulate(&cfg)?;
        record.case = sim.regime.case.to_string();
        record.outcome = sim.result.outcome.to_string();
        record.final_sup_u = Some(sim.result.final_state.sup_u());
        record.phi_plateau = sim.verdict.as_ref().map(|v| v.odi.phi_bounded_heuristic);
        write_run(&dir, &sim)
    });
    if let Err(e) = attempt {
        let msg = e.to_string();
        let _ = create_dir(&dir).and_then(|_| {
            std::fs::write(dir.join("error.txt"), format!("{msg}\n"))
                .map_err(|e| Error::io(&dir, e))
        });
        record.error = Some(msg);
    }
    record
}

/// Runs every member on a pool of `jobs` threads and writes `index.csv`.
pub fn run_sweep(spec: &SweepSpec, out: &Path, jobs: usize) -> Result<Vec<RunRecord>> {
    if jobs == 0 {
        return Err(Error::Argument("jobs must be >= 1".into()));
    }
    create_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start {jobs} workers: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        (0..spec.len())
            .into_par_iter()
            .map(|i| execute(spec, i, out))
            .collect()
    });
    let path = out.join("index.csv");
    std::fs::write(&path, index_csv(spec, &records)).map_err(|e| Error::io(&path, e))?;
    Ok(records)
}

fn index_columns(spec: &SweepSpec) -> String {
    let mut cols = vec!["run".to_string()];
    cols.extend(spec.axes.iter().map(|a| a.key.clone()));
    cols.extend(["case", "outcome", "final_sup_u", "phi_plateau", "error"].map(String::from));
    cols.join(",")
}

pub fn index_csv(spec: &SweepSpec, records: &[RunRecord]) -> String {
    let columns = index_columns(spec);
    let mut s = format!(
        "# tool={TOOL}\n# spec_hash={}\n# runs={}\n# columns={columns}\n{columns}\n",
        spec.hash(),
        records.len()
    );
    for r in records {
        let mut row = vec![format!("{:04}", r.index)];
        row.extend(r.values.iter().cloned());
        row.push(r.case.clone());
        row.push(r.outcome.clone());
        row.push(r.final_sup_u.map_or("na".into(), |x| format!("{x:e}")));
        row.push(r.phi_plateau.map_or("na".into(), |b| b.to_string()));
        row.push(
            r.error
                .as_deref()
                .map_or(String::new(), |e| e.replace([',', '\n'], ";")),
        );
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}
