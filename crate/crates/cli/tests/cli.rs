use std::path::PathBuf;
use std::process::{Command, Output};

fn qsg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsg")).args(args).env("QSG_THREADS", "2").output().expect("run qsg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qsg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn spectrum_is_deterministic() {
    let args = ["spectrum", "--graph", "chain", "--n", "6", "--samples", "1", "--seed", "7"];
    let a = qsg(&args);
    let b = qsg(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# qsg-config: "));
    assert!(text.lines().nth(1).unwrap().starts_with("bin_left,bin_right,count,density_estimate"));
    let total: u64 = rows(&text).iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 64);
    // worker count does not change the bytes
    let one = Command::new(env!("CARGO_BIN_EXE_qsg")).args(args).env("QSG_THREADS", "1").output().unwrap();
    assert_eq!(one.stdout, a.stdout);
}

#[test]
fn spectrum_with_law_and_eigenvalues() {
    let o = qsg(&["spectrum", "--graph", "p-uniform", "--n", "6", "--p", "6", "--samples", "3", "--law", "semicircle"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().ends_with(",law_density"));
    assert!(text.contains("# ks_distance: "));
    let o = qsg(&["spectrum", "--graph", "star", "--n", "4", "--samples", "2", "--eigenvalues", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 32);
    assert_eq!(v["summary"]["identity_failures"], 0);
    assert_eq!(v["config"]["command"], "spectrum");
}

#[test]
fn moments_with_oracle() {
    let o = qsg(&["moments", "--graph", "chain", "--n", "8", "--k-max", "7", "--samples", "20", "--oracle", "--dist", "rademacher"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 8);
    let oracle: Vec<f64> = r.iter().map(|row| row[5].parse().unwrap()).collect();
    for k in [1, 3, 5, 7] {
        assert_eq!(oracle[k], 0.0);
    }
    assert!((oracle[2] - 1.0).abs() < 1e-15);
    let mean2: f64 = r[2][1].parse().unwrap();
    assert!((mean2 - 1.0).abs() < 0.2);
}

#[test]
fn star_moment_approaches_five_thirds() {
    let o = qsg(&["moments", "--graph", "star", "--n", "10", "--k-max", "4", "--samples", "0", "--oracle", "--law", "star"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&stdout(&o));
    let m4: f64 = r[4][5].parse().unwrap();
    assert!((m4 - 5.0 / 3.0).abs() < (m4 - 3.0).abs());
    assert!(r[4][1].is_empty());
}

#[test]
fn laws_table() {
    let o = qsg(&["laws", "--lambda", "1", "--k-max", "8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("k,gaussian,semicircle,star,q-interp(1)"));
    let q = (-4.0f64 / 3.0).exp();
    let r = rows(&text);
    let m4: f64 = r[4][4].parse().unwrap();
    let m6: f64 = r[6][4].parse().unwrap();
    assert!((m4 - (2.0 + q)).abs() < 1e-10);
    assert!((m6 - (5.0 + 6.0 * q + 3.0 * q * q + q * q * q)).abs() < 1e-10);
    let d = qsg(&["laws", "--density", "--bins", "9"]);
    assert_eq!(rows(&stdout(&d)).len(), 9);
}

#[test]
fn partitions_table() {
    let o = qsg(&["partitions", "--k", "8"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.last().unwrap()[..3], ["8", "105", "14"]);
    assert_eq!(r[1][3], "2 1");
    let big = qsg(&["partitions", "--k", "40"]);
    assert_eq!(big.status.code(), Some(2));
}

#[test]
fn convergence_sweep() {
    let o = qsg(&["convergence", "--family", "circulant", "--offsets", "1,2", "--n", "6:14:2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let errs: Vec<f64> = rows(&text).iter().map(|r| r[6].parse().unwrap()).collect();
    assert_eq!(errs.len(), 5);
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
    assert!(text.contains("# monotone: true"));
}

#[test]
fn coefficients_export() {
    let o = qsg(&["coefficients", "--graph", "chain", "--n", "3", "--samples", "2", "--dist", "rademacher"]);
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2 * 27);
    let c: f64 = r[0][4].parse().unwrap();
    assert!((c.abs() - 1.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
    assert_eq!(r[0][3], "X1 X2");
}

#[test]
fn replay_round_trip() {
    for fmt in ["csv", "json"] {
        let path = tmp(&format!("spec.{fmt}"));
        let gfile = tmp("g.txt");
        std::fs::write(&gfile, "n 4\n1 2\n2 3 4\n").unwrap();
        let o = qsg(&[
            "spectrum",
            "--graph-file",
            gfile.to_str().unwrap(),
            "--samples",
            "3",
            "--seed",
            "11",
            "--format",
            fmt,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let r = qsg(&["replay", path.to_str().unwrap()]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        assert!(stdout(&r).contains("identical"));
        let text = std::fs::read_to_string(&path).unwrap();
        let (head, body) = text.split_at(text.find('\n').unwrap());
        let text = format!("{head}{}", body.replacen('0', "9", 1));
        std::fs::write(&path, text).unwrap();
        let r = qsg(&["replay", path.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(3));
        let diag: serde_json::Value = serde_json::from_slice(&r.stderr).unwrap();
        assert_eq!(diag["status"], "contract-failure");
    }
}

#[test]
fn errors_are_machine_readable() {
    let o = qsg(&["spectrum", "--graph", "torus", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["kind"], "config");
    let o = qsg(&["spectrum", "--graph", "chain", "--n", "20"]);
    assert_eq!(o.status.code(), Some(3));
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["kind"], "contract");
    let o = qsg(&["moments", "--graph", "complete", "--n", "12", "--k-max", "12", "--samples", "0", "--oracle"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qsg(&["replay", "/nonexistent/artifact.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_qsg")).args(["partitions"]).env("QSG_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
