mod common;

use std::fs;

use common::golden::{check_case, CASES, MANIFEST};

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["corpverify"];
    argv.extend_from_slice(args);
    corpverify::cli::run(&argv)
}

#[test]
fn golden_outputs() {
    for (case, args) in CASES {
        check_case(case, args).unwrap();
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        assert_eq!(
            run(&[
                "decompose",
                "--manifest",
                MANIFEST,
                "--bootstrap",
                "30",
                "--seed",
                "2",
                "--out",
                out
            ]),
            0
        );
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("decomposition.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn usage_and_validation_errors_exit_1() {
    let out = tempfile::tempdir().unwrap();
    let out = out.path().to_str().unwrap();
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["score", "--out", out]), 1);
    assert_eq!(
        run(&[
            "score",
            "--manifest",
            MANIFEST,
            "--rule",
            r#"{"rule":"spherical"}"#,
            "--out",
            out
        ]),
        1
    );
    assert_eq!(
        run(&[
            "firm",
            "--manifest",
            MANIFEST,
            "--thresholds",
            "0.5,0.2",
            "--weights",
            "1,1",
            "--out",
            out
        ]),
        1
    );
    assert_eq!(
        run(&["synthetic", "--n", "10", "--support", "0.5,0.2", "--out", out]),
        1
    );
    assert_eq!(
        run(&[
            "compare",
            "--manifest",
            MANIFEST,
            "--a",
            "sharp",
            "--b",
            "nobody",
            "--out",
            out
        ]),
        1
    );
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "time,y,lon,lead_day,value\n0,0,0,1,0.5\n").unwrap();
    let obs = fs::canonicalize("tests/data/obs.csv").unwrap();
    let manifest = dir.path().join("m.json");
    fs::write(
        &manifest,
        format!(
            r#"{{"systems":[{{"name":"bad","path":"{}","lead_days":[1]}}],"observation":"{}"}}"#,
            bad.display(),
            obs.display()
        ),
    )
    .unwrap();
    assert_eq!(
        run(&["score", "--manifest", manifest.to_str().unwrap(), "--out", out]),
        2
    );
    assert_eq!(
        run(&["score", "--manifest", "tests/data/missing.json", "--out", out]),
        2
    );
}

#[test]
fn run_record_lists_inputs_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run(&[
            "reliability",
            "--manifest",
            MANIFEST,
            "--bootstrap",
            "10",
            "--seed",
            "9",
            "--out",
            out
        ]),
        0
    );
    let record: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(record["command"], "reliability");
    assert_eq!(record["seeds"]["bootstrap"], 9);
    assert_eq!(record["inputs"].as_array().unwrap().len(), 5);
    assert!(record["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
}
