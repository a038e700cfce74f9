use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qng::artifact::{read_rows, Artifact, CertificationCsvRow, Payload, ThresholdCsvRow};
use qng::state_file::write_state;
use qng_core::fock::StateVector;
use tempfile::TempDir;

/// Search settings small enough for a test run.
const FAST: [&str; 8] = [
    "--dim",
    "12",
    "--screen",
    "100",
    "--starts",
    "2",
    "--validation-samples",
    "100",
];

fn qng(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qng"))
        .args(args)
        .env("QNG_CACHE_DIR", cache)
        .output()
        .expect("qng runs")
}

fn fast<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(FAST).collect()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn thresholds_json_and_csv_agree() {
    let tmp = TempDir::new().unwrap();
    let json = qng(
        &fast(&["thresholds", "--measure", "0,1", "--no-cache"]),
        tmp.path(),
    );
    assert_eq!(json.status.code(), Some(0));
    let art = Artifact::from_json(&stdout(&json)).unwrap();
    let Payload::ThresholdTable(table) = &art.payload else {
        panic!("wrong payload {}", art.payload.kind())
    };
    let value = table.rows[0].result.value;
    assert!((value - 0.9338).abs() < 1e-3);

    let csv = qng(
        &fast(&[
            "thresholds",
            "--measure",
            "0,1",
            "--no-cache",
            "--format",
            "csv",
        ]),
        tmp.path(),
    );
    let rows: Vec<ThresholdCsvRow> = read_rows(stdout(&csv).as_bytes(), "threshold_table").unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].threshold - value).abs() < 1e-11);
    assert_eq!(rows[0].hierarchy, "fock");
}

#[test]
fn cached_and_threaded_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cache = tmp.path().join("cache");
    let cache_arg = cache.to_str().unwrap();
    let args = fast(&[
        "thresholds",
        "--measure",
        "0,4",
        "--hierarchy",
        "N",
        "--orders",
        "1..3",
        "--cache-dir",
        cache_arg,
    ]);
    let first = qng(&args, tmp.path());
    assert_eq!(first.status.code(), Some(0));
    assert!(fs::read_dir(&cache).unwrap().count() >= 3);
    let second = qng(&args, tmp.path());
    assert_eq!(first.stdout, second.stdout);

    let one = qng(
        &fast(&[
            "thresholds",
            "--measure",
            "0,4",
            "--hierarchy",
            "N",
            "--orders",
            "1..3",
            "--no-cache",
            "--threads",
            "1",
        ]),
        tmp.path(),
    );
    let four = qng(
        &fast(&[
            "thresholds",
            "--measure",
            "0,4",
            "--hierarchy",
            "N",
            "--orders",
            "1..3",
            "--no-cache",
            "--threads",
            "4",
        ]),
        tmp.path(),
    );
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, first.stdout);
}

#[test]
fn saved_config_replays() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("run.json");
    let out = tmp.path().join("out.csv");
    let direct = qng(
        &fast(&[
            "converge",
            "--measure",
            "0,4",
            "--exclude",
            "4",
            "--n-range",
            "5..7",
            "--no-cache",
            "--format",
            "csv",
            "--save-config",
            config.to_str().unwrap(),
        ]),
        tmp.path(),
    );
    assert_eq!(direct.status.code(), Some(0));
    let replay = qng(
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(replay.status.code(), Some(0));
    assert!(replay.stdout.is_empty());
    assert_eq!(fs::read(&out).unwrap(), direct.stdout);
    assert!(stdout(&direct).starts_with("# kind=convergence schema_version=1 "));
}

#[test]
fn depth_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let ok = qng(
        &["depth", "--measure", "0,1", "--threshold", "0.93"],
        tmp.path(),
    );
    assert_eq!(ok.status.code(), Some(0));
    let Payload::Depth(d) = Artifact::from_json(&stdout(&ok)).unwrap().payload else {
        panic!("not a depth artifact")
    };
    assert!((d.rows[0].loss.as_ref().unwrap().value - 0.150538).abs() < 1e-5);

    let none = qng(
        &["depth", "--measure", "0,1", "--threshold", "1.0"],
        tmp.path(),
    );
    assert_eq!(none.status.code(), Some(4));
    let sweep = qng(
        &[
            "depth",
            "--measure",
            "0,1",
            "--threshold",
            "0.9",
            "--boundary-sweep",
            "lin:0:0.02:5",
            "--format",
            "csv",
        ],
        tmp.path(),
    );
    assert_eq!(sweep.status.code(), Some(0));
    assert!(stdout(&sweep).starts_with("# kind=depth_boundary "));
}

#[test]
fn usage_and_physicality_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let bad_family = qng(
        &["thresholds", "--measure", "0,1", "--hierarchy", "X"],
        tmp.path(),
    );
    assert_eq!(bad_family.status.code(), Some(2));
    let bad_pair = qng(&["thresholds", "--measure", "2,1"], tmp.path());
    assert_eq!(bad_pair.status.code(), Some(2));
    let bad_grid = qng(
        &["curve", "--measure", "0,1", "--lambda-grid", "log:3:1:0"],
        tmp.path(),
    );
    assert_eq!(bad_grid.status.code(), Some(2));
    let unphysical = qng(
        &fast(&[
            "certify",
            "--measure",
            "0,1",
            "--c",
            "0.99",
            "--pn",
            "0.2",
            "--no-cache",
        ]),
        tmp.path(),
    );
    assert_eq!(unphysical.status.code(), Some(5));
}

fn write(tmp: &TempDir, name: &str, state: &StateVector) -> String {
    let path = tmp.path().join(name);
    write_state(&path, &state.to_density()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn certify_state_files() {
    let tmp = TempDir::new().unwrap();
    let cache = tmp.path().join("cache");
    let cat = write(&tmp, "cat.json", &StateVector::balanced(0, 4, 8).unwrap());
    let out = qng(
        &fast(&[
            "certify",
            "--measure",
            "0,4",
            "--state",
            &cat,
            "--hierarchy",
            "N",
            "--format",
            "csv",
            "--cache-dir",
            cache.to_str().unwrap(),
        ]),
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<CertificationCsvRow> =
        read_rows(stdout(&out).as_bytes(), "certification").unwrap();
    assert_eq!(
        rows.iter().map(|r| r.order).collect::<Vec<_>>(),
        vec![1, 2, 3, 4]
    );
    assert!(rows
        .iter()
        .all(|r| r.pass && (r.measured - 1.0).abs() < 1e-12));

    let fock = write(&tmp, "one.json", &StateVector::fock(1, 4).unwrap());
    let out = qng(
        &fast(&[
            "certify",
            "--measure",
            "0,1",
            "--state",
            &fock,
            "--no-cache",
        ]),
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let Payload::Certification(report) = Artifact::from_json(&stdout(&out)).unwrap().payload else {
        panic!("not a certification report")
    };
    assert!(!report.any_certified());
    assert!(report.summary.iter().all(|s| s.max_certified.is_none()));
}

#[test]
fn measured_tuple_uses_relative_criteria() {
    let tmp = TempDir::new().unwrap();
    let out = qng(
        &fast(&[
            "certify",
            "--measure",
            "0,1",
            "--c",
            "0.9",
            "--pn",
            "0.45",
            "--hierarchy",
            "N",
            "--lambda-grid",
            "log:5:0.01:100",
            "--p-grid",
            "lin:0:1:11",
            "--no-cache",
            "--format",
            "csv",
        ]),
        tmp.path(),
    );
    let rows: Vec<CertificationCsvRow> =
        read_rows(stdout(&out).as_bytes(), "certification").unwrap();
    let absolute = rows.iter().find(|r| r.criterion == "absolute").unwrap();
    let relative = rows.iter().find(|r| r.criterion != "absolute").unwrap();
    assert!(!absolute.pass);
    assert!(relative.threshold <= absolute.threshold + 1e-9);
    assert_eq!(out.status.code(), Some(if relative.pass { 0 } else { 1 }));
}

#[test]
fn curve_csv_has_physical_column() {
    let tmp = TempDir::new().unwrap();
    let out = qng(
        &fast(&[
            "curve",
            "--measure",
            "0,1",
            "--observable",
            "Pn",
            "--lambda-grid",
            "log:5:0.01:100",
            "--p-grid",
            "lin:0:1:6",
            "--no-cache",
            "--format",
            "csv",
        ]),
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# kind=curve "));
    assert_eq!(
        lines.next().unwrap(),
        "p,c_threshold,raw,lambda,absolute,physical"
    );
    assert_eq!(lines.count(), 6);
}
