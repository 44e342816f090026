use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &[&str] = &["--set", "mx=4", "--set", "my=4", "--set", "num_uts=8", "--set", "num_pilots=4"];

fn tsce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsce")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tsce(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn with_out<'a>(sub: &'a str, dir: &'a Path, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![sub, "--out", dir.to_str().unwrap()];
    v.extend_from_slice(SMALL);
    v.extend_from_slice(extra);
    v
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn help_lists_subcommands() {
    let text = ok(&["--help"]);
    for sub in ["scenario", "allocate", "estimate", "sweep", "complexity", "config"] {
        assert!(text.contains(sub), "{sub} missing");
    }
}

#[test]
fn sweep_csv_is_reproducible() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--trials", "3", "--seed", "17", "--allocation", "greedy,random", "--set", "p_dbw_max=5"];
    ok(&with_out("sweep", a.path(), &args));
    ok(&with_out("sweep", b.path(), &args));
    let first = fs::read(a.path().join("sweep.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("sweep.csv")).unwrap());
    assert!(a.path().join("sweep.gp").exists());

    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("p_dbw,estimator,allocation,mu_d,s,k,nmse_avg,nmse_std,trials,seed,wall_ms\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",3,17,0.000")));

    let mut other = args;
    other[3] = "18";
    ok(&with_out("sweep", c.path(), &other));
    assert_ne!(first, fs::read(c.path().join("sweep.csv")).unwrap());
}

#[test]
fn sweep_flags_select_rows() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&with_out(
        "sweep",
        dir.path(),
        &["--trials", "2", "--estimator", "tsce", "--mu-d", "1,2", "--set", "p_dbw_max=0", "--timing"],
    ));
    assert!(stdout.contains("mu_d=1") && stdout.contains("mu_d=2"));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[1], "tsce");
        assert!(f[10].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn scenario_and_allocation_exports() {
    let dir = tempfile::tempdir().unwrap();
    ok(&with_out("scenario", dir.path(), &[]));
    let text = fs::read_to_string(dir.path().join("scenario.csv")).unwrap();
    assert!(text.starts_with("ut_index,xi_x,xi_y,nadir_deg,elevation_deg,slant_km,shadow_db,beta\n"));
    assert_eq!(text.lines().count(), 9);
    for line in text.lines().skip(1) {
        let nadir: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=30.0).contains(&nadir));
    }

    for kind in ["greedy", "random"] {
        ok(&with_out("allocate", dir.path(), &["--allocation", kind]));
        let text = fs::read_to_string(dir.path().join("allocation.csv")).unwrap();
        assert!(text.starts_with("ut_index,pilot_index\n"));
        let mut used = [false; 4];
        for (i, line) in text.lines().skip(1).enumerate() {
            let (u, s) = line.split_once(',').unwrap();
            assert_eq!(u.parse::<usize>().unwrap(), i);
            used[s.parse::<usize>().unwrap()] = true;
        }
        assert!(used.iter().all(|x| *x));
    }
}

#[test]
fn estimate_writes_per_ut_rows() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&with_out("estimate", dir.path(), &["--trials", "4", "--p-dbw", "10", "--estimator", "mmse,tsce"]));
    assert!(stdout.contains("mmse") && stdout.contains("tsce"));
    let text = fs::read_to_string(dir.path().join("estimate.csv")).unwrap();
    assert!(text.starts_with("ut_index,estimator,nmse,analytic_nmse\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 8);
}

#[test]
fn complexity_table_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["complexity", "--full-scale", "--out", dir.path().to_str().unwrap(), "--np", "64,128,256"]);
    let text = fs::read_to_string(dir.path().join("complexity.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1] && w[1][2] > w[0][2]));
    assert!(rows[1][3] > 1e3);
}

#[test]
fn shipped_configs_parse() {
    for name in ["desk.cfg", "refinement.cfg", "full.cfg"] {
        let path = configs().join(name);
        let text = ok(&["config", "--config", path.to_str().unwrap()]);
        assert!(text.contains("mu_d = "), "{name}");
    }
    let text = ok(&["config", "--config", configs().join("refinement.cfg").to_str().unwrap()]);
    assert!(text.contains("mu_d = 1,2,4"));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mx = 4\nmx = 5\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["sweep", "--set", "bogus=1"],
        vec!["sweep", "--set", "novalue"],
        vec!["sweep", "--estimator", "kalman"],
        vec!["sweep", "--config", "/does/not/exist.cfg"],
        vec!["sweep", "--config", cfg.to_str().unwrap()],
        vec!["config", "--full-scale", "--config", cfg.to_str().unwrap()],
        vec!["allocate", "--set", "num_uts=3"],
    ];
    for args in cases {
        let out = tsce(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error"), "{args:?}: {err}");
    }
}
