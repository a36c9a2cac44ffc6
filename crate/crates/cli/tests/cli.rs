use std::process::{Command, Output};

use polyslice::{canonicalize, QuadratureConfig};

fn polyslice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyslice"))
        .args(args)
        .env_remove("POLYSLICE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn volume_extremiser_prints_two() {
    let o = polyslice(&["volume", "--direction", "1,1", "--method", "auto"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("2.00000000000"));
    // Canonicalization changed the input, so a notice is expected.
    assert!(String::from_utf8_lossy(&o.stderr).contains("canonicalized"));
}

#[test]
fn psi_two() {
    let o = polyslice(&["psi", "--s", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let value: f64 = out.split_whitespace().next().unwrap().parse().unwrap();
    assert!((value - 1.0).abs() < 1e-6, "{out}");
    assert!(out.contains('±'));
}

#[test]
fn classify_lists_l13() {
    let o = polyslice(&["classify", "--direction", "0.9,0.3,0.316227766"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("L13")).expect("L13 listed");
    let bound: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert_eq!(bound, 2.0);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["volume", "--direction", "1,abc"][..],
        &["volume", "--method", "bogus", "--n", "3"],
        &["volume"],
        &["psi"],
        &["psi", "--s", "1.2"],
        &["volume", "--n", "3", "--tol", "-1"],
        &["sweep", "--sampler", "nope"],
        &["sweep", "--n", "1"],
        &["nonsense"],
        &["volume", "--direction", "0,0"],
        &["volume", "--direction", "1,2", "--n", "3"],
    ] {
        let o = polyslice(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn bad_thread_cap_exits_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_polyslice"))
        .args(["psi", "--s", "3"])
        .env("POLYSLICE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn negative_weights_are_accepted() {
    let o = polyslice(&["volume", "--direction", "-0.6,0.8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), 1.0 / (0.8f64 * 0.8));
}

#[test]
fn injected_failure_exits_one() {
    let o = polyslice(&["sweep", "--n", "2,3", "--directions", "3", "--inject-failure"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL record 0"));
    let o = polyslice(&["sweep", "--n", "2,3", "--directions", "3"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn json_round_trips_library_call() {
    let raw = [0.6, 0.5, 0.4, 0.3, 0.2];
    let a = canonicalize(&raw).unwrap();
    let list = a.weights().iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    for (method, expect) in [
        ("quad", polyslice::volume_quadrature(&a, &QuadratureConfig::default()).unwrap()),
        ("mc", polyslice::volume_monte_carlo(&a, 20_000, 7).unwrap()),
    ] {
        let o = polyslice(&[
            "volume", "--direction", &list, "--method", method, "--samples", "20000", "--seed", "7", "--format", "json",
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stderr.is_empty(), "canonical input needs no notice");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["value"].as_f64().unwrap().to_bits(), expect.value.to_bits(), "{method}");
        assert_eq!(v["error"].as_f64().unwrap().to_bits(), expect.error.to_bits(), "{method}");
        assert_eq!(v["samples_or_panels"].as_u64().unwrap(), expect.samples_or_panels);
    }
}

#[test]
fn csv_and_out_file() {
    let dir = std::env::temp_dir().join(format!("polyslice-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("psi.csv");
    let o = polyslice(&["scan-psi", "--grid", "2,3,4", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("s,value,error"));
    assert_eq!(lines.count(), 3);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_csv_has_one_row_per_check() {
    let o = polyslice(&["sweep", "--n", "3", "--directions", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1 + 2 * polyslice::harness::CHECK_NAMES.len());
}

#[test]
fn near_extremiser_scan_passes() {
    let o = polyslice(&["scan-near-extremiser", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
}
