use std::fs;
use std::process::Command;

fn eqweyl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eqweyl"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .env_remove("RUST_LIB_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = eqweyl(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const COUNTING: &str = r#"{
    "model": "sphere",
    "theorem": "counting_single",
    "c": 1.0,
    "delta": 0.16,
    "family": {"fixed": [0]},
    "h_schedule": {"h_max": 1e-2, "h_min": 1e-4, "count": 7},
    "backend": "exact",
    "seed": 11
}"#;

#[test]
fn models_lists_the_catalog() {
    let out = stdout(&["models"]);
    assert_eq!(out.lines().count(), 5);
    for name in ["sphere", "flat_torus", "bumpy_torus", "spheroid"] {
        assert!(out.lines().any(|l| l.starts_with(&format!("{name},"))));
    }
}

#[test]
fn spectrum_of_the_round_sphere() {
    let out = stdout(&["spectrum", "sphere", "--k", "0", "--h", "1", "--emax", "25"]);
    let e: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(e, [0.0, 2.0, 6.0, 12.0, 20.0]);
}

#[test]
fn reduce_sphere_gives_pi() {
    let out = stdout(&["reduce", "sphere", "--c", "1"]);
    let v: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn counting_run_approaches_pi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, COUNTING).unwrap();
    let csv = stdout(&["weyl", "--config", cfg.to_str().unwrap()]);
    let lhs: Vec<f64> = csv
        .lines()
        .filter(|l| l.starts_with("counting_single,"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(lhs.len(), 7);
    let err = |x: f64| (x - std::f64::consts::PI).abs();
    assert!(err(lhs[6]) < err(lhs[0]));
    assert!(csv.starts_with("# config sha256: "));
}

#[test]
fn strict_mode_rejects_wide_windows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, COUNTING.replace("0.16", "0.3")).unwrap();
    let out = eqweyl(&["weyl", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("delta:"), "{err}");
    let out = eqweyl(&["weyl", "--config", cfg.to_str().unwrap(), "--permissive"]);
    assert!(out.status.success());
}

#[test]
fn artifacts_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let family = COUNTING
        .replace("counting_single", "weyl_family")
        .replace("0.16", "0.05")
        .replace(r#"{"fixed": [0]}"#, r#"{"power_law": 0.1}"#);
    fs::write(&cfg, family).unwrap();
    let mut seen = Vec::new();
    for jobs in ["1", "8"] {
        let out = dir.path().join(format!("out{jobs}"));
        let o = eqweyl(&[
            "weyl",
            "--config",
            cfg.to_str().unwrap(),
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let files: Vec<Vec<u8>> = [
            "weyl_family.csv",
            "weyl_family.json",
            "weyl_family.errors.dat",
        ]
        .iter()
        .map(|f| fs::read(out.join(f)).unwrap())
        .collect();
        seen.push(files);
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn fit_rereads_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, COUNTING).unwrap();
    let csv = stdout(&["weyl", "--config", cfg.to_str().unwrap()]);
    let path = dir.path().join("r.csv");
    fs::write(&path, csv).unwrap();
    let json = stdout(&["fit", path.to_str().unwrap(), "--delta", "0.16"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["slope"].as_f64().unwrap() > 0.0);
}

#[test]
fn reduce_accepts_energies_then_a_grid() {
    let out = stdout(&["reduce", "sphere", "--c", "-0.5", "1", "--c-grid", "2:4:3"]);
    assert_eq!(out.lines().count(), 6);
}
