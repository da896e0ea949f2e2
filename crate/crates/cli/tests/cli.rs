use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use recurlab::hcvec::PipelineConfig;
use recurlab::lemmacheck::HarnessReport;
use recurlab::shiftop::TracePoint;
use recurlab::{DensityReport, ExactVector, RecurrenceResult, Scaffold, StructureCertificate, TargetSpec};
use recurlab_cli::RunConfig;

const CONST_TWO: &str = r#"{"rule":"const","value":"2"}"#;

fn recurlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recurlab")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn parse<T: serde::de::DeserializeOwned>(v: &Value) -> T {
    serde_json::from_value(v.clone()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn density_of_the_evens() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("profile.csv");
    let out = recurlab(&[
        "density",
        "--set",
        r#"{"generator":{"variant":"Periodic","q":2,"R":[0]},"window_end":9999}"#,
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = stdout_json(&out);
    let r: DensityReport = parse(&doc["result"]);
    let half = recurlab::Density::new(1, 2);
    assert_eq!(r.lower_estimate, half);
    // The windowed upper is a max over prefixes; odd prefix lengths sit at
    // (k + 1)/(2k + 1), largest at the first one, n₀ = 624.
    assert_eq!(r.schedule.n0, 624);
    assert_eq!(r.upper_estimate, recurlab::Density::new(313, 625));

    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["n", "num", "den"]);
    assert_eq!(rows.len(), r.prefix_profile.len());
    for (row, p) in rows.iter().zip(&r.prefix_profile) {
        assert_eq!(row, &[p.n.to_string(), p.density.numer().to_string(), p.density.denom().to_string()]);
    }
}

#[test]
fn detect_refutes_the_interval_family_complement() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("E.json");
    let e = r#"{"generator":{"variant":"IntervalFamily","n":3},"window_end":262144}"#;
    std::fs::write(
        &path,
        r#"{"generator":{"variant":"Complement","inner":{"variant":"IntervalFamily","n":3}},"window_end":262144}"#,
    )
    .unwrap();
    let at = format!("@{}", path.display());
    let out = recurlab(&["detect", "--set", &at, "--ps", "--bmax", "16", "--L", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["result"][0]["detector"], "ps");
    let cert: StructureCertificate = parse(&doc["result"][0]["certificate"]);
    assert!(!cert.is_certified());
    assert!(stderr(&out).contains("refuted"));

    let out = recurlab(&["detect", "--set", e, "--ps", "--thick", "--bmax", "1", "--L", "32768"]);
    let doc = stdout_json(&out);
    for entry in doc["result"].as_array().unwrap() {
        let cert: StructureCertificate = parse(&entry["certificate"]);
        assert!(cert.is_certified(), "{}", entry["detector"]);
    }
}

#[test]
fn construct_example_passes_and_round_trips() {
    let out = recurlab(&["construct", "--weights", CONST_TWO, "--m", "2", "--window", "10000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["passed"], true);
    let r = &doc["result"];
    let pc: PipelineConfig = parse(&r["config"]);
    assert_eq!((pc.m, pc.window_end), (2, 10_000));
    let scaffold: Scaffold = parse(&r["scaffold"]);
    let y: ExactVector = parse(&r["y"]);
    let target: TargetSpec = parse(&r["target"]);
    assert_eq!(target.m, 2);
    assert!(!y.is_zero());
    let rec: RecurrenceResult = parse(&r["recurrence"]);
    assert!(scaffold.union().iter().all(|&l| rec.returns.contains(l)));
    let cert: StructureCertificate = parse(&r["recurrence_certificate"]);
    assert!(cert.is_certified());
    assert_eq!(cert.revalidate(&rec.returns), Ok(()));
}

#[test]
fn usage_errors_exit_two() {
    let out = recurlab(&["density", "--set", "{\n  \"window_end\": 9,\n  oops\n}"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3, column 3"), "{}", stderr(&out));

    let out = recurlab(&["density", "--set", r#"{"window_end": "nine"}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1, column"), "{}", stderr(&out));

    for args in [
        &["frobnicate"][..],
        &["density"],
        &["detect", "--set", "@/nonexistent/set.json"],
        &["construct", "--weights", CONST_TWO, "--m", "1", "--mode", "float"],
        &["check", "consecutive", "--instances", "1", "--csv", "x.csv"],
        &["orbit", "--weights", r#"{"rule":"const"}"#, "--x", r#"{"coords":{}}"#, "--z", r#"{"coords":{}}"#],
    ] {
        let out = recurlab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failed_assertions_exit_one() {
    // No single shift can lift the union density to α/γ with zero slack.
    let out = recurlab(&[
        "check", "hindman", "--instances", "5", "--window", "4000", "--bmax", "1", "--tol", "0",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["passed"], false);
    let r: HarnessReport = parse(&doc["result"]);
    assert!(!r.failures.is_empty());
}

#[test]
fn orbit_and_recurrence_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    // B³(e₃/8) = e₀ under w ≡ 2.
    let x = r#"{"coords":{"3":"1/8"}}"#;
    let z = r#"{"coords":{"0":"1"}}"#;
    let out = recurlab(&[
        "orbit", "--weights", CONST_TWO, "--x", x, "--z", z, "--window", "10", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let trace: Vec<TracePoint> = parse(&stdout_json(&out)["result"]);
    assert_eq!(trace.len(), 11);
    assert_eq!((trace[3].distance_lo, trace[3].distance_hi), (0.0, 0.0));
    assert!(trace[4].distance_lo >= 1.0 - 1e-12);
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["n", "distance_lo", "distance_hi"]);
    assert_eq!(rows.len(), 11);

    let out = recurlab(&[
        "recurrence", "--weights", CONST_TWO, "--x", x, "--z", z, "--eps", "1/10", "--window", "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: RecurrenceResult = parse(&stdout_json(&out)["result"]);
    assert_eq!(r.returns.elements(), &[3]);
    assert!(r.disjointness_certified);
}

#[test]
fn echoed_config_round_trips_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["density", "--set", r#"{"elements":[0,3,4,9],"window_end":12}"#, "--lengths", "2,4"],
        &["check", "consecutive", "--instances", "3", "--window", "2000", "--seed", "11"],
        &["recurrence", "--weights", CONST_TWO, "--x", r#"{"coords":{"3":"1/8","9":"1/512"}}"#,
          "--z", r#"{"coords":{"0":"1"}}"#, "--eps", "1/10", "--window", "40", "--mode", "float"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let first = recurlab(args);
        assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
        let doc = stdout_json(&first);
        let config: RunConfig = parse(&doc["config"]);
        assert_eq!(serde_json::to_value(&config).unwrap(), doc["config"]);

        let saved = dir.path().join(format!("run{i}.json"));
        std::fs::write(&saved, &first.stdout).unwrap();
        let again = recurlab(&["replay", &format!("@{}", saved.display())]);
        assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
        assert_eq!(again.stdout, first.stdout, "{args:?}");

        let bare = serde_json::to_string(&doc["config"]).unwrap();
        assert_eq!(recurlab(&["replay", &bare]).stdout, first.stdout);
    }
}

#[test]
fn out_flag_writes_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.json");
    let out = recurlab(&[
        "check", "two-syndetic", "--instances", "4", "--window", "3000", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let r: HarnessReport = parse(&doc["result"]);
    assert_eq!((r.instances, r.passes), (4, 4));
    assert_eq!(doc["config"]["check"], "two-syndetic");
    assert_eq!(doc["config"]["b_max"], 32);
}
