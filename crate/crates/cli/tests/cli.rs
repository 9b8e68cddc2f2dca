use std::path::Path;
use std::process::{Command, Output};

use phasesense::metrology::gain;
use phasesense::DensityMatrix;
use phasesense_cli::records::{read_rows, GainRow, RangeRow, StateRecord};
use serde::Deserialize;

fn phasesense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasesense")).args(args).env_remove("PHASESENSE_DIM").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = phasesense(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows<T: for<'de> Deserialize<'de>>(text: &str) -> Vec<T> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().map(|r| r.unwrap()).collect()
}

#[derive(Debug, Deserialize)]
struct ChannelRow {
    n: usize,
    p_in: f64,
    p_out: f64,
}

#[test]
fn channel_output_is_normalized() {
    let rows: Vec<ChannelRow> = csv_rows(&ok(&["channel", "--state", "fock:3", "--alpha", "0.4"]));
    let total: f64 = rows.iter().map(|r| r.p_out).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(rows.iter().find(|r| r.p_in > 0.0).unwrap().n, 3);
}

#[test]
fn channel_full_matrix_is_diagonal_for_fock_input() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    ok(&["channel", "--state", "fock:2", "--alpha", "0.3", "--full", full.to_str().unwrap()]);
    #[derive(Deserialize)]
    struct Elem {
        m: usize,
        n: usize,
        re: f64,
        im: f64,
    }
    let elems: Vec<Elem> = read_rows(&full).unwrap();
    assert!(elems.iter().filter(|e| e.m != e.n).all(|e| e.re.abs() < 1e-12 && e.im.abs() < 1e-12));
}

#[test]
fn fisher_scan_matches_library() {
    let text = ok(&["fisher-scan", "--state", "fock:4", "--grid", "0.01,0.1,0.5"]);
    let rows: Vec<GainRow> = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    let diag = DensityMatrix::fock(4, 5).unwrap().diagonal();
    for r in &rows {
        assert_eq!(r.gain, gain(&diag, r.alpha).unwrap());
        assert_eq!(r.bound, 9.0);
    }
}

#[test]
fn jsonl_format_and_ranges_file() {
    let dir = tempfile::tempdir().unwrap();
    let ranges = dir.path().join("r.csv");
    let text = ok(&[
        "--format",
        "jsonl",
        "fisher-scan",
        "--state",
        "squeezed:3",
        "--grid",
        "log:0.01:1:20",
        "--tau",
        "1e-3",
        "--ranges",
        ranges.to_str().unwrap(),
    ]);
    let rows: Vec<GainRow> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 20);
    let r: Vec<RangeRow> = read_rows(&ranges).unwrap();
    assert_eq!(r.len(), 1);
    assert!(r[0].start.unwrap() < r[0].end.unwrap());
}

#[test]
fn bad_arguments_fail_cleanly() {
    for args in [
        vec!["fisher-scan", "--state", "unicorn:3"],
        vec!["fisher-scan", "--state", "fock:2", "--grid", "0.5,0.1"],
        vec!["channel", "--state", "fock:2", "--alpha", "-1"],
        vec!["zoo"],
    ] {
        let out = phasesense(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
}

#[test]
fn failed_grid_points_are_reported_after_the_rest() {
    // the first-order map turns negative on the squeezed tail at this tau
    let out = phasesense(&["fisher-scan", "--state", "fock:2", "--state", "squeezed:8", "--grid", "0.1", "--model", "loss", "--tau", "0.05"]);
    assert!(!out.status.success());
    let rows: Vec<GainRow> = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}

#[test]
fn dim_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_phasesense"))
        .args(["fisher-scan", "--state", "squeezed:5", "--grid", "0.1"])
        .env("PHASESENSE_DIM", "10")
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn decohere_keeps_trace() {
    #[derive(Deserialize)]
    struct Row {
        before: f64,
        after: f64,
    }
    let rows: Vec<Row> = csv_rows(&ok(&["decohere", "--state", "cat:2", "--tau", "0.01", "--nbar", "0.5"]));
    let (b, a): (f64, f64) = rows.iter().fold((0.0, 0.0), |(b, a), r| (b + r.before, a + r.after));
    assert!((b - 1.0).abs() < 1e-9 && (a - 1.0).abs() < 1e-9);
}

#[test]
fn zoo_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--out", dir.path().to_str().unwrap(), "zoo", "--target", "6", "--wigner-points", "3"]);
    let rec: StateRecord = serde_json::from_str(&std::fs::read_to_string(dir.path().join("compass.json")).unwrap()).unwrap();
    assert!((rec.mean_n - 6.0).abs() < 1e-3);
    assert!(Path::new(&dir.path().join("compass_wigner.csv")).exists());
    #[derive(Deserialize)]
    struct Row {
        label: String,
        spacing: usize,
    }
    let rows: Vec<Row> = read_rows(&dir.path().join("zoo.csv")).unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().find(|r| r.label == "compass").unwrap().spacing, 4);
}

#[test]
fn optimize_is_reproducible() {
    let args = [
        "--dim", "10", "optimize", "--alpha", "0.1", "--t-over-2pi", "0,0.3", "--super-iterations", "1", "--evals", "40",
        "--steps", "200",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let dir = tempfile::tempdir().unwrap();
    let pulses = dir.path().join("p.jsonl");
    let mut with_seed = args.to_vec();
    with_seed.extend(["--seeds", "3,4", "--pulses", pulses.to_str().unwrap()]);
    let text = ok(&with_seed);
    assert_eq!(text.lines().count(), 1 + 4);
    assert_eq!(std::fs::read_to_string(&pulses).unwrap().lines().count(), 4);
}

#[test]
fn verify_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["--out", d, "reproduce", "fig2"]);
    ok(&["verify", d]);
    let gains = dir.path().join("gains.csv");
    let text = std::fs::read_to_string(&gains).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
    let g: f64 = fields[5].parse().unwrap();
    fields[5] = (g * (1.0 + 1e-8)).to_string();
    lines[1] = fields.join(",");
    std::fs::write(&gains, lines.join("\n") + "\n").unwrap();
    let out = phasesense(&["verify", d]);
    assert!(!out.status.success());
}
