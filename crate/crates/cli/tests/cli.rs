use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypifs_cli::config::ExperimentConfig;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypifs"))
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn orbit(config: &Path, out: &Path, extra: &[&str]) -> Output {
    exe().arg("--out").arg(out).args(extra).arg("orbit").arg(config).output().unwrap()
}

struct Row {
    nu: usize,
    probe: usize,
    re: f64,
    im: f64,
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Row>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            Row {
                nu: rec[0].parse().unwrap(),
                probe: rec[1].parse().unwrap(),
                re: rec[2].parse().unwrap(),
                im: rec[3].parse().unwrap(),
            }
        })
        .collect();
    (header, rows)
}

#[test]
fn dist_prints_fifteen_significant_digits() {
    for (args, want) in [
        (&["dist", "--surface", "disk", "0", "0.5"][..], "0.549306144334055"),
        (&["dist", "--surface", "half-plane", "i", "2i"][..], "0.346573590279973"),
        (&["dist", "--surface", "disk", "0", "0"][..], "0"),
    ] {
        let o = run(args);
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), want);
    }
}

#[test]
fn dist_rejects_bad_points() {
    for args in [
        &["dist", "--surface", "disk", "0", "1.5"][..],
        &["dist", "--surface", "disk", "zero", "0"][..],
        &["dist", "--surface", "half-plane", "i", "-i"][..],
        &["dist", "--surface", "annulus", "0.5", "0.6"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn half_scaled_trace_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = orbit(&configs().join("half-scaled.json"), dir.path(), &["--plot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"kind\":\"oscillating\""));
    let (header, rows) = read_rows(&dir.path().join("half-scaled.csv"));
    assert_eq!(header.join(","), "nu,probe,re,im,diam,step,base_dist");
    assert_eq!(rows.len(), 64 * 2);
    for row in rows.iter().filter(|r| r.probe == 0) {
        let sign = if row.nu % 2 == 0 { 1.0 } else { -1.0 };
        let series: f64 = (0..=row.nu).map(|j| (-0.5f64).powi(j as i32)).sum();
        assert!((row.re - 0.1 * sign * series).abs() < 1e-12 && row.im.abs() < 1e-12);
    }
    let svg = std::fs::read_to_string(dir.path().join("half-scaled.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 2);
}

#[test]
fn identity_trace_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    assert!(orbit(&configs().join("identity.json"), dir.path(), &[]).status.success());
    let text = std::fs::read_to_string(dir.path().join("identity.csv")).unwrap();
    let mut lines = text.lines().skip(1);
    let first: Vec<&str> = lines.by_ref().take(2).map(|l| l.split_once(',').unwrap().1).collect();
    for (k, line) in lines.enumerate() {
        assert_eq!(line.split_once(',').unwrap().1, first[k % 2]);
    }
}

#[test]
fn right_trace_is_frozen_at_the_first_map() {
    let dir = tempfile::tempdir().unwrap();
    assert!(orbit(&configs().join("right-constant.json"), dir.path(), &[]).status.success());
    let (_, rows) = read_rows(&dir.path().join("right-constant.csv"));
    let first: Vec<&Row> = rows.iter().filter(|r| r.nu == 0).collect();
    assert_eq!(first.len(), 3);
    for row in &rows {
        let base = first[row.probe];
        assert!((row.re - base.re).abs() < 1e-12 && (row.im - base.im).abs() < 1e-12, "nu {}", row.nu);
    }
    assert_eq!(rows.last().unwrap().nu, 64);
}

#[test]
fn orbit_output_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert!(orbit(&configs().join("rotation-summable.json"), dir.path(), &["--plot", "--seed", "3"]).status.success());
    }
    for name in ["rotation-summable-trace.csv", "rotation-summable.svg"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn guard_failure_names_the_map() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("escape.json");
    std::fs::write(
        &config,
        r#"{
  "version": 1,
  "surface": { "kind": "half-plane" },
  "sequence": {
    "family": "explicit",
    "maps": [
      { "variant": "Mobius", "a": [1.0, 0.0], "b": [1.0, 0.0], "c": [0.0, 0.0], "d": [1.0, 0.0] },
      { "variant": "Mobius", "a": [1.0, 0.0], "b": [0.0, -2.0], "c": [0.0, 0.0], "d": [1.0, 0.0] }
    ]
  },
  "probes": [[0.0, 1.0]],
  "steps": 4
}"#,
    )
    .unwrap();
    let o = orbit(&config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("map 1"));
}

#[test]
fn io_failures_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = orbit(&dir.path().join("missing.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = orbit(&configs().join("identity.json"), &blocker.join("sub"), &[]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("identity.json")).unwrap();
    let bad = text.replacen("\"steps\"", "\"stpes\": 3, \"steps\"", 1);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, bad).unwrap();
    assert_eq!(orbit(&path, dir.path(), &[]).status.code(), Some(2));
    let wrong_version = text.replace("\"version\": 1", "\"version\": 2");
    std::fs::write(&path, wrong_version).unwrap();
    assert_eq!(orbit(&path, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn shipped_configs_round_trip() {
    let mut count = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let first = ExperimentConfig::load(&path).unwrap();
        let again = ExperimentConfig::parse(&first.to_json()).unwrap();
        assert_eq!(first, again, "{}", path.display());
        assert_eq!(first.to_json(), again.to_json());
        first.build_sequence().unwrap();
        count += 1;
    }
    assert!(count >= 5);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["validate", "no-such", "--out", out]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["validate", "bloch-left", "--out", out]);
    assert!(o.status.success(), "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("bloch-left.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "bloch-left");
    assert_eq!(report["pass"], true);

    let o = run(&["validate", "oscillating", "--J", "3", "--out", out]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("breakpoints [0,1,"));

    let o = run(&["validate", "oscillating", "--J", "9", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_flags_reach_the_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // A gap threshold above the 4 delta / 3 cluster gap hides the oscillation.
    let o = run(&["validate", "half-scaled", "--tol-gap", "0.5", "--out", out]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL half-scaled"));
}
