//! Golden-file regression cases for the CLI on the bundled dataset.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the expected files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "tests/data/manifest.json";

pub const CASES: &[(&str, &[&str])] = &[
    ("score", &["score", "--rule", r#"{"rule":"log"}"#]),
    (
        "decompose",
        &["decompose", "--bootstrap", "40", "--seed", "11", "--svg"],
    ),
    (
        "decompose_firm",
        &[
            "decompose",
            "--rule",
            r#"{"rule":"firm","thresholds":[0.2,0.4],"weights":[1,2]}"#,
        ],
    ),
    ("murphy", &["murphy", "--grid", "0.1,0.2,0.3,0.4,0.5"]),
    (
        "murphy_diff",
        &["murphy", "--diff", "sharp", "coarse", "--theta", "0.3"],
    ),
    ("reliability", &["reliability", "--bootstrap", "20", "--seed", "5"]),
    ("roc", &["roc", "--concave"]),
    ("pr", &["pr"]),
    (
        "performance",
        &["performance", "--thresholds", "0.1,0.2,0.3,0.4", "--svg"],
    ),
    (
        "firm",
        &[
            "firm",
            "--thresholds",
            "0.2,0.5",
            "--weights",
            "1,2",
            "--compare",
            "coarse",
        ],
    ),
    (
        "compare",
        &["compare", "--a", "sharp", "--b", "coarse", "--thetas", "0.2,0.3,0.4"],
    ),
    ("synthetic", &["synthetic", "--n", "2000", "--seed", "3"]),
];

fn golden_dir(case: &str) -> PathBuf {
    Path::new("tests/data/golden").join(case)
}

fn read_dir(dir: &Path, out: &str) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text = fs::read_to_string(&path).unwrap();
        // the output directory is the only run-specific argument
        files.insert(name, text.replace(out, "<out>"));
    }
    files
}

/// Runs one case and compares its outputs with the stored files. Returns a
/// description of the first mismatch.
pub fn check_case(case: &str, args: &[&str]) -> Result<(), String> {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    let mut argv = vec!["corpverify"];
    argv.extend_from_slice(args);
    if args[0] != "synthetic" {
        argv.extend_from_slice(&["--manifest", MANIFEST]);
    }
    argv.extend_from_slice(&["--out", &out]);
    let code = corpverify::cli::run(&argv);
    if code != 0 {
        return Err(format!("{case}: exit code {code}"));
    }
    let actual = read_dir(tmp.path(), &out);
    let dir = golden_dir(case);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        for (name, text) in &actual {
            fs::write(dir.join(name), text).unwrap();
        }
        return Ok(());
    }
    let expected = read_dir(&dir, "<out>");
    if expected.keys().ne(actual.keys()) {
        return Err(format!(
            "{case}: files {:?} != expected {:?}",
            actual.keys(),
            expected.keys()
        ));
    }
    for (name, text) in &expected {
        if &actual[name] != text {
            return Err(format!("{case}: {name} differs from golden copy"));
        }
    }
    Ok(())
}
