use std::path::{Path, PathBuf};

use scpqca::cli::{run, EXIT_INPUT, EXIT_NO_COVER, EXIT_OK};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_str().unwrap().to_string()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("scpqca").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn m1_solve_reports_a_as_necessary() {
    let m1 = data("m1.csv");
    let (code, out, _) =
        call(&["solve", "--data", &m1, "--outcome", "O", "--label", "1", "--consistency", "0.8", "--cutoff", "2", "--unique-cover", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("A=1          1.0000  (3/3)"), "{out}");
    assert!(out.contains("A*B"), "{out}");
    assert!(out.contains("●*"), "{out}");
    assert!(out.contains("Solution coverage     0.6667  (2/3)"), "{out}");
}

#[test]
fn solve_json_is_well_formed() {
    let (code, out, _) = call(&["solve", "--data", &data("m1.csv"), "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["necessity"]["necessary"][0]["expression"], "A");
    assert_eq!(v["solution"]["consistency"]["num"], 2);
    assert_eq!(v["solution"]["consistency"]["den"], 2);
    assert_eq!(v["no_cover"], false);
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let (code, out, err) = call(&["--bogus"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(out.is_empty());
    assert!(err.contains("Usage:"), "{err}");
    assert!(!err.contains('\u{1b}'), "no colour codes: {err:?}");
}

#[test]
fn help_and_version_exit_0() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("solve"));
    assert_eq!(call(&["--version"]).0, EXIT_OK);
}

#[test]
fn missing_file_names_the_flag() {
    let (code, _, err) = call(&["solve", "--data", "does-not-exist.csv"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("--data"), "{err}");
}

#[test]
fn bad_threshold_is_an_input_error() {
    let (code, _, err) = call(&["solve", "--data", &data("m1.csv"), "--consistency", "1.5"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("1.5"), "{err}");
}

#[test]
fn bad_csv_row_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "bad.csv", "id,A,O\na,0,1\nb,,0\n");
    let (code, _, err) = call(&["necessity", "--data", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn contradictory_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "nc.csv", "id,A,B,O\na,0,0,1\nb,0,0,0\nc,1,1,1\nd,1,1,0\ne,0,1,1\nf,0,1,0\ng,1,0,1\nh,1,0,0\n");
    let (code, _, err) = call(&["solve", "--data", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_NO_COVER);
    assert!(err.contains("vacuous"), "{err}");
}

#[test]
fn candidates_on_remote_conditions() {
    let (code, out, _) = call(&["candidates", "--data", &data("remote_conditions.csv"), "--cutoff", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("ms*PI*LP"), "{out}");
}

#[test]
fn synth_round_trips_through_solve() {
    let (code, csv, _) = call(&["synth", "--pathway", "ab+CD+ace+BDF", "--samples", "200", "--seed", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().count(), 201);
    assert!(csv.starts_with("id,A,B,C,D,E,F,OUTCOME\n"));
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "s.csv", &csv);
    let (code, out, _) = call(&["solve", "--data", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["solution"]["consistency"]["value"], 1.0);
}

#[test]
fn seed_env_matches_flag() {
    let synth = ["synth", "--pathway", "ab", "--factors", "3", "--samples", "20", "--confound", "2"];
    let from_env = std::process::Command::new(env!("CARGO_BIN_EXE_scpqca")).args(synth).env("SCPQCA_SEED", "42").output().unwrap();
    let from_flag = call(&[&synth[..], &["--seed", "42"]].concat());
    let default = call(&[&synth[..], &["--seed", "0"]].concat());
    assert_eq!(String::from_utf8(from_env.stdout).unwrap(), from_flag.1);
    assert_ne!(from_flag.1, default.1);
}

#[test]
fn emit_schema_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("schema.json");
    let (code, _, _) = call(&["--emit-schema", p.to_str().unwrap(), "necessity", "--data", &data("m1.csv")]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(v["outcome"]["name"], "O");
    assert_eq!(v["cases"], 6);
}

#[test]
fn sweep_and_xval_run() {
    let (code, out, _) =
        call(&["sweep", "--data", &data("remote_conditions.csv"), "--consistency-grid", "0.8,0.7", "--cutoff-grid", "2,5", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 5, "{out}");
    let (code, out, _) = call(&["synth", "--pathway", "ab+CD", "--factors", "4", "--samples", "100"]);
    assert_eq!(code, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "x.csv", &out);
    let (code, out, _) = call(&["xval", "--data", p.to_str().unwrap(), "--reps", "3", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["repetitions"].as_array().unwrap().len(), 3);
}

#[test]
fn experiment_summarises_medians() {
    let (code, out, _) = call(&["experiment", "--pathway", "ab+CD+ace+BDF", "--confound", "0,20", "--seeds", "3", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["summary"][0]["median_consistency"], 1.0);
}
