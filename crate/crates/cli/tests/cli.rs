use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fdp::growth::hex_digest;

fn fdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdp")).args(args).output().expect("binary runs")
}

fn script(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts").join(name).display().to_string()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn validate_accepts_the_corpus() {
    for p in ["synaptogenesis", "reinforcement", "frequency_sweep", "pavlov", "pattern_recognition", "std", "stdp"] {
        let o = fdp(&["validate", &script(&format!("{p}.exp"))]);
        assert_eq!(o.status.code(), Some(0), "{p}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn typo_names_phase_and_field() {
    let o = fdp(&["validate", &script("invalid/belle_typo.exp")]);
    assert_eq!(o.status.code(), Some(2));
    let d = stderr_json(&o);
    assert_eq!(d["status"], "input_error");
    assert_eq!(d["section"], "phase bell_alone");
    assert_eq!(d["field"], "stimulus.belle");
    assert!(d["line"].as_u64().unwrap() > 0);
}

#[test]
fn missing_file_and_bad_flags_are_input_errors() {
    assert_eq!(fdp(&["validate", "/nonexistent/x.exp"]).status.code(), Some(2));
    assert_eq!(fdp(&["run", &script("pavlov.exp"), "--formats", "png"]).status.code(), Some(2));
    assert_eq!(fdp(&["run", &script("pavlov.exp"), "--snapshot-every", "0"]).status.code(), Some(2));
}

#[test]
fn pavlov_seed_one_passes_with_phase_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let o = fdp(&["run", &script("pavlov.exp"), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["schema"], 1);
    assert_eq!(m["passed"], true);
    let phases = ["probe", "pause", "bell_alone", "offset", "paired", "test"];
    let snaps = m["snapshots"].as_array().unwrap();
    let at_phase = snaps.iter().filter(|s| phases.contains(&s["label"].as_str().unwrap())).count();
    assert!(at_phase >= 5, "{at_phase} phase snapshots");
    assert!(snaps.iter().all(|s| !s["files"].as_array().unwrap().is_empty()));

    // every artifact listed, every hash verifies, nothing unlisted
    let listed: Vec<&serde_json::Value> = m["artifacts"].as_array().unwrap().iter().collect();
    for a in &listed {
        let bytes = fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(hex_digest(&bytes), a["sha256"].as_str().unwrap());
        assert_eq!(bytes.len() as u64, a["bytes"].as_u64().unwrap());
    }
    assert_eq!(files_under(&out).len(), listed.len() + 1);

    // rerun: byte-identical artifacts
    let again = tmp.path().join("b");
    let o = fdp(&["run", &script("pavlov.exp"), "--seed", "1", "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (fa, fb) = (files_under(&out), files_under(&again));
    assert_eq!(fa.len(), fb.len());
    for (a, b) in fa.iter().zip(&fb) {
        assert_eq!(a.strip_prefix(&out).unwrap(), b.strip_prefix(&again).unwrap());
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{}", a.display());
    }

    // a snapshot graph renders to the emitted SVG
    let json = fa.iter().find(|p| p.extension().is_some_and(|e| e == "json") && p.starts_with(out.join("snapshots"))).unwrap();
    let svg = tmp.path().join("r.svg");
    let o = fdp(&["render", json.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&svg).unwrap(), fs::read(json.with_extension("svg")).unwrap());
}

#[test]
fn formats_and_snapshot_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("csv");
    let o = fdp(&["run", &script("pavlov.exp"), "--seed", "2", "--out", out.to_str().unwrap(), "--formats", "csv", "--snapshot-every", "50"]);
    assert!(o.status.code().is_some_and(|c| c <= 1));
    let files = files_under(&out);
    assert!(files.iter().all(|p| p.extension().is_some_and(|e| e == "csv" || e == "exp") || p.ends_with("manifest.json")));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let periodic = m["snapshots"].as_array().unwrap().iter().filter(|s| s["label"].as_str().unwrap().contains('@')).count();
    // four grow phases of 150 cycles
    assert_eq!(periodic, 4 * 3);
    let trace = fs::read_to_string(out.join("series/phases.csv")).unwrap();
    assert!(trace.starts_with("seed,"));
    assert!(trace.contains("\r\n"));
}

#[test]
fn unwritable_output_leaves_no_files() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("out");
    let o = fdp(&["run", &script("pavlov.exp"), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["status"], "input_error");
    assert_eq!(files_under(tmp.path()), vec![blocker]);
}

#[test]
fn solver_failure_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(script("pavlov.exp")).unwrap();
    let tol = text.lines().find(|l| l.starts_with("tol_V")).unwrap();
    let path = tmp.path().join("tight.exp");
    fs::write(&path, text.replace(tol, "tol_V = 1e-30")).unwrap();
    let out = tmp.path().join("out");
    let o = fdp(&["run", path.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stderr_json(&o)["status"], "numeric_failure");
    assert!(!out.exists());
}
