use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chemolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemolab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Data rows of a CSV with `#` metadata lines and a header row.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn regime_linear_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.txt", "m1 = 1\nm2 = 1\ngamma = 2\ndim = 2\n");
    let o = chemolab(&["regime", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("case=A1\n"));
    assert!(out.contains("gamma_lower_a1=1.333333"));
}

#[test]
fn regime_a2_with_mu() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.txt",
        "m1 = 1\nm2 = 0\ngamma = 1.2\nchi = 0.1\nmu = 50\n",
    );
    let o = chemolab(&["regime", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("case=A2_with_mu\n"));
    assert!(out.contains("mu_threshold="));
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.txt", "mu = 1\nmuu = 2\n");
    let o = chemolab(&["regime", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("muu"), "{err}");

    let o = chemolab(&["regime", "--config", "/nonexistent/cfg.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/cfg.txt"));

    let o = chemolab(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_uniform_logistic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.txt",
        "dim = 1\ncells_x = 32\nlambda = 1\nmu = 1\nchi = 1\n\
         u_kind = constant\nu_baseline = 1\nv_kind = constant\nv_baseline = 1\n\
         t_end = 1\nrecord_every = 0.1\n",
    );
    let out = dir.path().join("run");
    let o = chemolab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("outcome=completed"));

    let rows = csv_rows(&out.join("diagnostics.csv"));
    assert_eq!(rows.len(), 11);
    let last = &rows[10];
    let num = |k: usize| last[k].parse::<f64>().unwrap();
    assert_eq!(num(0), 1.0);
    assert!((num(2) - 1.0).abs() <= 1e-6);
    assert!((num(3) - (-1f64).exp()).abs() <= 1e-3);
    assert!(fs::read_to_string(out.join("diagnostics.csv"))
        .unwrap()
        .starts_with("# tool=chemolab "));
    assert!(fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .contains("outcome=completed"));
}

#[test]
fn simulate_blowup_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.txt",
        "dim = 1\ncells_x = 16\nlambda = 5\nmu = 0.1\nu_kind = constant\nu_baseline = 0.5\n\
         blowup_cap = 1\nt_end = 2\nrecord_every = 0.1\n",
    );
    let out = dir.path().join("run");
    let o = chemolab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rows = csv_rows(&out.join("diagnostics.csv"));
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r.len() == 8));
    let last_sup: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!(last_sup > 1.0);
}

#[test]
fn simulate_step_limit_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.txt",
        "dim = 1\ncells_x = 16\nmax_steps = 3\n",
    );
    let out = dir.path().join("run");
    let o = chemolab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .contains("outcome=step_limit"));
}

#[test]
fn long_snapshot_interval_gives_first_and_last() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.txt",
        "dim = 1\ncells_x = 16\nt_end = 0.1\nrecord_every = 0.05\nsnapshot_every = 5\n",
    );
    let out = dir.path().join("run");
    let o = chemolab(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(out.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["0000_u.txt", "0000_v.txt", "0001_u.txt", "0001_v.txt"]
    );
    let last = fs::read_to_string(out.join("snapshots/0001_u.txt")).unwrap();
    assert!(last.lines().any(|l| l == "t 1e-1"));
}

const SWEEP: &str = "dim = 1\ncells_x = 24\nt_end = 0.2\nrecord_every = 0.05\n\
                     u_kind = seeded_perturbation\nu_amplitude = 0.4\nu_seed = 5\n\
                     sweep.gamma = 1.2, 1.6, 2\nsweep.mu = 0.5, 2\n";

#[test]
fn sweep_writes_index_and_run_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.txt", SWEEP);
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    let o = chemolab(&[
        "sweep",
        "--spec",
        &spec,
        "--out",
        one.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("runs=6\n"));
    let o = chemolab(&[
        "sweep",
        "--spec",
        &spec,
        "--out",
        four.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));

    let rows = csv_rows(&one.join("index.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][..3], ["0000", "1.2", "0.5"]);
    assert!(rows.iter().all(|r| r[4] == "completed"));
    for k in 0..6 {
        assert!(one.join(format!("run_{k:04}/config.txt")).exists());
    }
    assert_eq!(
        fs::read(one.join("index.csv")).unwrap(),
        fs::read(four.join("index.csv")).unwrap()
    );
}

#[test]
fn sweep_rejects_zero_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "s.txt", SWEEP);
    let out = dir.path().join("o");
    let o = chemolab(&[
        "sweep",
        "--spec",
        &spec,
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}
