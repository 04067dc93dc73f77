use std::path::Path;
use std::process::{Command, Output};

const MODEL: [&str; 6] = [
    "--p-x",
    "0.25,0.25,0.25,0.25",
    "--p-y-given-x",
    "0.08,0.3066666666666667,0.3066666666666667,0.3066666666666666;0.3066666666666667,0.08,0.3066666666666667,0.3066666666666666;0.3066666666666667,0.3066666666666667,0.08,0.3066666666666666;0.3066666666666667,0.3066666666666667,0.3066666666666666,0.08",
    "--p-s",
    "0.3,0.7",
];

fn deanon(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_deanon"));
    cmd.args(args).env_remove("DEANON_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("DEANON_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn with_model<'a>(sub: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![sub];
    v.extend(MODEL);
    v.extend(extra);
    v
}

#[test]
fn generate_detect_and_match() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = deanon(&with_model("gen", &["--m", "200", "--n", "10", "--lambda", "10000", "--master-seed", "1"]), Some(d));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["d1.bin", "d2.bin", "g1.bin", "g2.bin", "truth.json"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let truth: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("truth.json")).unwrap()).unwrap();

    let g1 = d.join("g1.bin");
    let g2 = d.join("g2.bin");
    let l = d.join("L.csv");
    let out = deanon(
        &["detect-deletions", "--g1", g1.to_str().unwrap(), "--g2", g2.to_str().unwrap(),
          "--alphabet-size", "4", "--distances", l.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let det: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let counts = truth["pattern"].as_array().unwrap();
    let deleted: Vec<u64> = (0..counts.len() as u64).filter(|&j| counts[j as usize] == 0).collect();
    let found: Vec<u64> = det["deleted"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(found, deleted);
    assert_eq!(std::fs::read_to_string(&l).unwrap().lines().count(), 10);

    let d2 = d.join("d2.bin");
    // No replicas in this model, so the series has a single component.
    let out = deanon(&["detect-replicas", "--d2", d2.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(6));

    let out = deanon(&with_model("match", &["--input", d.to_str().unwrap(), "--epsilon", "0.3"]), None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], truth["seed"]);
    assert!(report["row_error_rate"].as_f64().unwrap() <= 1.0);

    let out = deanon(&["estimate", "--g1", g1.to_str().unwrap(), "--g2", g2.to_str().unwrap(), "--alphabet-size", "4"], Some(d));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let est = std::fs::read_to_string(d.join("estimate.toml")).unwrap();
    assert!(deanon::DistributionEstimate::from_toml(&est).is_ok());
}

#[test]
fn replica_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = deanon(
        &["gen", "--p-x", "0.5,0.5", "--p-y-given-x", "0.9,0.1;0.1,0.9", "--p-s", "0.2,0.4,0.4",
          "--m", "2000", "--n", "40", "--lambda", "10"],
        Some(d),
    );
    assert_eq!(gen.status.code(), Some(0));
    let csv = d.join("h.csv");
    let out = deanon(
        &["detect-replicas", "--d2", d.join("d2.bin").to_str().unwrap(), "--output", csv.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,h_j,decision"));
    for (j, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], j.to_string());
        assert!(f[2] == "replica" || f[2] == "distinct");
    }
}

#[test]
fn experiment_writes_csv_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = deanon(
        &with_model("experiment", &["--m", "32", "--n", "12", "--lambda", "3000", "--trials", "3",
            "--sweep-axis", "n", "--sweep-values", "12,16"]),
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("experiment.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bsc.toml");
    std::fs::write(&cfg, "p_x = [0.5, 0.5]\np_y_given_x = [[0.9, 0.1], [0.1, 0.9]]\np_s = [0.0, 1.0]\n").unwrap();
    let out = deanon(&["capacity", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let c: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((c["capacity"].as_f64().unwrap() - 0.531004).abs() < 1e-6);
    let out = deanon(&["capacity", "--config", cfg.to_str().unwrap(), "--p-s", "1,0"], None);
    let c: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(c["capacity"].as_f64().unwrap(), 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(deanon(&["capacity", "--p-x", "0.5,0.5"], None).status.code(), Some(2));
    assert_eq!(deanon(&["capacity", "--config", "/nonexistent.toml"], None).status.code(), Some(2));
    let big = with_model("experiment", &["--m", "100000000", "--n", "1000", "--lambda", "10", "--memory-cap-bytes", "1000"]);
    assert_eq!(deanon(&big, None).status.code(), Some(3));

    // Independent seeds: no remapping separates the components.
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = deanon(
        &["gen", "--p-x", "0.5,0.5", "--p-y-given-x", "0.5,0.5;0.5,0.5", "--p-s", "0,1",
          "--m", "10", "--n", "8", "--lambda", "5000"],
        Some(d),
    );
    assert_eq!(gen.status.code(), Some(0));
    let out = deanon(
        &["detect-deletions", "--g1", d.join("g1.bin").to_str().unwrap(), "--g2",
          d.join("g2.bin").to_str().unwrap(), "--alphabet-size", "2", "--replica-free"],
        None,
    );
    assert_eq!(out.status.code(), Some(5));
}
