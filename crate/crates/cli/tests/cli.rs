use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dynapool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynapool"))
        .args(args)
        .env("DYNAPOOL_LOG", "warn")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(out: &Path, count: usize, classes: usize, seed: u64) -> Output {
    dynapool(&[
        "synth", "--count", &count.to_string(), "--classes", &classes.to_string(),
        "--frames", "8", "--size", "20", "--seed", &seed.to_string(), "--out", p(out),
    ])
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_writes_count_per_class() {
    let tmp = tempfile::tempdir().unwrap();
    let o = synth(tmp.path(), 20, 5, 1);
    assert!(o.status.success());
    let m: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["sequences"].as_array().unwrap().len(), 100);
    assert_eq!(m["class_count"], 5);
}

#[test]
fn synth_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(synth(&a, 2, 3, 9).status.success());
    assert!(synth(&b, 2, 3, 9).status.success());
    assert!(synth(&c, 2, 3, 10).status.success());
    assert_eq!(tree(&a), tree(&b));
    assert_ne!(tree(&a), tree(&c));
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(synth(tmp.path(), 3, 0, 1).status.code(), Some(1));
    assert_eq!(dynapool(&["synth", "--count", "1", "--colour", "red"]).status.code(), Some(1));
    assert_eq!(dynapool(&["--print-config", "--lambda", "-1"]).status.code(), Some(1));
}

#[test]
fn print_config_lists_defaults_and_overrides() {
    let o = dynapool(&["--print-config", "--tolerance", "0.2", "--gmm-k", "4"]);
    assert!(o.status.success());
    let cfg = stdout_json(&o);
    assert_eq!(cfg["schema_version"], 1);
    assert_eq!(cfg["representation"]["histogram"]["tolerance"], 0.2);
    assert_eq!(cfg["representation"]["gmm"]["components"], 4);
    assert_eq!(cfg["representation"]["pooling"]["lambda"], 1.0);

    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("cfg.json");
    fs::write(&file, serde_json::to_string(&cfg).unwrap()).unwrap();
    let again = stdout_json(&dynapool(&["--print-config", "--config", p(&file)]));
    assert_eq!(again, cfg);
}

#[test]
fn convert_resumes_and_isolates_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    assert!(synth(&data, 3, 2, 4).status.success());
    let manifest = data.join("manifest.json");

    let first = dynapool(&["convert", "--manifest", p(&manifest), "--out", p(&out), "--workers", "2"]);
    assert!(first.status.success());
    assert_eq!(stdout_json(&first)["converted"], 6);
    let pngs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "png").count();
    assert_eq!(pngs, 36);

    let before = tree(&out);
    let second = dynapool(&["convert", "--manifest", p(&manifest), "--out", p(&out)]);
    assert!(second.status.success());
    let s = stdout_json(&second);
    assert_eq!((s["converted"].as_u64(), s["skipped"].as_u64()), (Some(0), Some(6)));
    assert_eq!(tree(&out), before);

    // a changed config invalidates the sidecars
    let third = dynapool(&["convert", "--manifest", p(&manifest), "--out", p(&out), "--lambda", "0.5"]);
    assert_eq!(stdout_json(&third)["converted"], 6);

    fs::write(data.join("c1_0002").join("frame_000003.png"), b"garbage").unwrap();
    let out2 = tmp.path().join("out2");
    let bad = dynapool(&["convert", "--manifest", p(&manifest), "--out", p(&out2)]);
    assert_eq!(bad.status.code(), Some(3));
    let s = stdout_json(&bad);
    assert_eq!(s["converted"], 5);
    assert_eq!(s["failed"], serde_json::json!(["c1_0002"]));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("frame_000003.png"));
}

#[test]
fn evaluate_reports_the_recognition_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let o = dynapool(&[
        "synth", "--count", "3", "--classes", "5", "--frames", "12", "--size", "32", "--out", p(&data),
    ]);
    assert!(o.status.success());
    let manifest = data.join("manifest.json");
    let report_path = tmp.path().join("report.json");
    let o = dynapool(&[
        "evaluate", "--train-manifest", p(&manifest), "--test-manifest", p(&manifest),
        "--cache", p(&tmp.path().join("cache")), "--out", p(&report_path), "--downsample", "8",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(r["n"], 15);
    assert!(r["recognition_rate"].as_f64().unwrap() >= 0.95);
    assert_eq!(r["per_class"].as_array().unwrap().len(), 5);

    let mut m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    m["sequences"][0].as_object_mut().unwrap().remove("label");
    let unlabelled = data.join("unlabelled.json");
    fs::write(&unlabelled, m.to_string()).unwrap();
    let o = dynapool(&["evaluate", "--train-manifest", p(&manifest), "--test-manifest", p(&unlabelled)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no label"));
}

fn write_tables(dir: &Path, rows: &[(&str, [f64; 2], [f64; 2])]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for kind in ["ddi", "ddni", "ddmni"] {
        for dir_name in ["forward", "backward"] {
            let path = dir.join(format!("{kind}_{dir_name}.csv"));
            let mut text = String::from("sequence_id,kind,direction,score_0,score_1\n");
            for (id, fwd, bwd) in rows {
                let s = match (kind, dir_name) {
                    ("ddi", "forward") => *fwd,
                    ("ddi", "backward") => *bwd,
                    _ => [0.5, 0.5],
                };
                text += &format!("{id},{kind},{dir_name},{},{}\n", s[0], s[1]);
            }
            fs::write(&path, text).unwrap();
            files.push(path);
        }
    }
    files
}

fn fuse_args(files: &[PathBuf]) -> Vec<&str> {
    let mut args = vec!["fuse", "--class-count", "2", "--dump-intermediate"];
    args.extend(files.iter().map(|f| p(f)));
    args
}

#[test]
fn fuse_dumps_the_pair_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let files = write_tables(tmp.path(), &[("a", [0.6, 0.4], [0.8, 0.2]), ("b", [0.1, 0.9], [0.3, 0.7])]);
    let o = dynapool(&fuse_args(&files));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout_json(&o);
    let ddi = &out[0]["pairs"]["ddi"];
    assert!((ddi[0].as_f64().unwrap() - 6.0 / 7.0).abs() < 1e-12);
    assert!((ddi[1].as_f64().unwrap() - 1.0 / 7.0).abs() < 1e-12);
    assert_eq!(out[0]["predicted_label"], 0);
    assert_eq!(out[1]["predicted_label"], 1);
    assert_eq!(out[1]["sequence_id"], "b");
}

#[test]
fn fuse_names_the_first_id_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    let files = write_tables(tmp.path(), &[("a", [0.6, 0.4], [0.8, 0.2]), ("b", [0.5, 0.5], [0.5, 0.5])]);
    let text = fs::read_to_string(&files[3]).unwrap().replace("\nb,", "\nzz,");
    fs::write(&files[3], text).unwrap();
    let o = dynapool(&fuse_args(&files));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains("\"zz\""), "{err}");
}
