//! Binary-level behaviour: exit codes, shipped scene files, output files.

use std::path::PathBuf;
use std::process::{Command, Output};

use ampere_core::cli::{SceneFile, EXIT_FAILED, EXIT_OK, EXIT_USAGE};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ampere"))
}

fn scene(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

fn shipped() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scene(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("killed by signal")
}

#[test]
fn every_shipped_scene_round_trips() {
    let files = shipped();
    assert!(files.len() >= 5);
    for path in files {
        let file = SceneFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = SceneFile::parse(&file.to_json()).unwrap();
        assert_eq!(again.to_json(), file.to_json(), "{}", path.display());
    }
}

#[test]
fn every_shipped_scene_runs_clean() {
    for path in shipped() {
        let out = exe().arg("run").arg("--scene").arg(&path).output().unwrap();
        assert_eq!(code(&out), EXIT_OK, "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn link_prints_integer_and_estimate() {
    let out = exe().args(["link", "--scene"]).arg(scene("hopf.json")).args(["--id", "hopf"]).output().unwrap();
    assert_eq!(code(&out), EXIT_OK);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("scene_id"), "{header}");
    let row = lines.next().unwrap();
    assert!(row.starts_with("hopf,"), "{row}");
    // floats carry 16 digits after the point
    assert!(row.split(',').any(|f| f.contains('.') && f.contains('e') && f.split('.').nth(1).unwrap().len() >= 20));
}

#[test]
fn output_files_are_written_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lemma.csv");
    let run = || {
        let out = exe().args(["lemma53", "--n", "2,4,8"]).arg("--out").arg(&csv).output().unwrap();
        assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(&csv).unwrap(), std::fs::read(csv.with_extension("json")).unwrap())
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    let text = String::from_utf8(first.0).unwrap();
    assert!(text.starts_with("n,A_total,A_c1,A_c2,abs_err,error_estimate,c1_closed_form,Lk,error\n"));
    assert_eq!(text.lines().count(), 4);
    let json: serde_json::Value = serde_json::from_slice(&first.1).unwrap();
    assert!(json.is_object());
}

#[test]
fn usage_errors_exit_2() {
    let missing = exe().args(["run", "--scene", "does/not/exist.json"]).output().unwrap();
    assert_eq!(code(&missing), EXIT_USAGE);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("exist.json"));

    let unknown = exe().arg("frobnicate").output().unwrap();
    assert_eq!(code(&unknown), EXIT_USAGE);

    let threads = exe().arg("selftest").env("THREADS", "zero").output().unwrap();
    assert_eq!(code(&threads), EXIT_USAGE);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version": 1, "curves": {}, "bogus": true}"#).unwrap();
    let out = exe().arg("run").arg("--scene").arg(&bad).output().unwrap();
    assert_eq!(code(&out), EXIT_USAGE);
}

#[test]
fn failing_row_exits_1() {
    // meshes this coarse cannot reach the error target
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fail.json");
    std::fs::write(
        &path,
        r#"{
  "version": 1,
  "surfaces": {"sq": {"patch": {"kind": "planar_rect", "corner": [0,0,0], "edge_a": [1,0,0], "edge_b": [0,1,0]}}},
  "experiments": [
    {"kind": "similitude_general", "surface": "sq", "r": [0.5, 0.5, 1.0], "h": 1e-4, "mesh_sizes": [1, 2, 3]}
  ]
}"#,
    )
    .unwrap();
    let out = exe().arg("run").arg("--scene").arg(&path).output().unwrap();
    assert_eq!(code(&out), EXIT_FAILED, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn selftest_passes() {
    let out = exe().arg("selftest").env("THREADS", "2").output().unwrap();
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stdout));
}
