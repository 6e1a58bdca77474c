//! The `siegel` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn siegel(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_siegel"));
    c.args(args).env_remove("SIEGEL_CACHE_DIR");
    if let Some(dir) = cache {
        c.env("SIEGEL_CACHE_DIR", dir);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eigenvalue_prints_the_snapped_integer() {
    let o = siegel(&["eigenvalue", "--form", "chi10", "--prime", "3", "--digits", "4"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "snapped     21960"), "{text}");
    assert!(text.contains("timing"));
}

#[test]
fn rigorous_tp2_for_e4() {
    let o = siegel(
        &["eigenvalue", "--form", "e4", "--prime", "2", "--operator", "tp2", "--mode", "rigorous", "--digits", "3"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().any(|l| l == "snapped     1549"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["eigenvalue", "--form", "nope", "--prime", "2"][..],
        &["eigenvalue", "--form", "e4", "--prime", "4"],
        &["eigenvalue", "--form", "e4", "--prime", "2", "--y11", "-1"],
        &["list-cosets", "--prime", "9"],
        &["frobnicate"],
    ] {
        let o = siegel(args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn cosets_one_per_line() {
    for (op, p, n) in [("tp", "3", 40), ("tp2_1", "2", 30)] {
        let o = siegel(&["list-cosets", "--op", op, "--prime", p], None);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).lines().count(), n);
    }
}

#[test]
fn expansion_is_idempotent_and_used() {
    let tmp = tempfile::tempdir().unwrap();
    let o = siegel(&["expand-generators", "--trace", "6"], Some(tmp.path()));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("wrote")).count(), 5);
    let again = siegel(&["expand-generators", "--trace", "6"], Some(tmp.path()));
    assert!(stdout(&again).starts_with("up to date"));
    let o = siegel(&["eigenvalue", "--form", "e4", "--prime", "2", "--trace-bound", "6"], Some(tmp.path()));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "snapped     45"));
}

#[test]
fn corrupt_cache_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(siegel(&["expand-generators", "--trace", "4"], Some(tmp.path())).status.success());
    let path = tmp.path().join("e4_T4.qexp");
    let text = std::fs::read_to_string(&path).unwrap().replacen("240", "241", 1);
    std::fs::write(&path, text).unwrap();
    let o = siegel(&["expand-generators", "--trace", "6"], Some(tmp.path()));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("e4_T4.qexp"));
}

#[test]
fn form_documents_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("ups20.json");
    std::fs::write(
        &path,
        r#"{"name": "ups20", "weight": 20, "terms": [
            {"coeff": ["-1"], "expo": [2, 0, 0, 1]},
            {"coeff": ["-1"], "expo": [1, 1, 1, 0]},
            {"coeff": ["1785600"], "expo": [0, 0, 2, 0]}]}"#,
    )
    .unwrap();
    let file = path.to_str().unwrap();
    let o = siegel(&["eigenvalue", "--form-file", file, "--prime", "2"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().any(|l| l == "snapped     -840960"));

    std::fs::write(&path, r#"{"name": "x", "weight": 20, "terms": [{"coeff": ["1"], "expo": [1, 0, 0, 0]}]}"#).unwrap();
    // an invalid document is a usage error
    assert_eq!(siegel(&["eigenvalue", "--form-file", file, "--prime", "2"], None).status.code(), Some(2));
}

#[test]
fn bench_prints_timing_and_box() {
    let o = siegel(&["bench", "--form", "e4", "--prime", "2", "--threads", "2"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("box "));
}

#[test]
fn verify_passes() {
    let o = siegel(&["verify"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
