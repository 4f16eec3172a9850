use std::path::Path;
use std::process::{Command, Output};

use leakaudit::report::ReportFile;

fn leakaudit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leakaudit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn synth_then_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = leakaudit(&["synth", "--seed", "3"], dir.path());
    assert!(o.status.success());
    let data = dir.path().join("dataset.csv");
    assert!(data.exists() && dir.path().join("dataset.json").exists());

    let o = leakaudit(
        &[
            "run",
            "--data",
            data.to_str().unwrap(),
            "--setup",
            "i,iii",
            "--trees",
            "20",
            "--folds",
            "5",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file = ReportFile::load(&dir.path().join("report.json")).unwrap();
    assert_eq!(file.setups.len(), 2);
    assert_eq!(file.setups[0].folds.len(), 5);

    let table = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    std::fs::remove_file(dir.path().join("report.md")).unwrap();
    let o = leakaudit(&["report"], dir.path());
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(dir.path().join("report.md")).unwrap(),
        table
    );
    assert!(table.contains("| (i) imputation + oversampling after partitioning |"));
    assert!(table.contains("| (iii) imputation + oversampling before partitioning |"));
}

#[test]
fn different_seeds_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let read = |seed: &str| {
        let out = dir.path().join(seed);
        let o = leakaudit(
            &["run", "--setup", "i", "--trees", "10", "--seed", seed],
            &out,
        );
        assert!(o.status.success());
        std::fs::read(out.join("report.json")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = leakaudit(&["run", "--setup", "v"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown setup `v`"));

    let o = leakaudit(
        &["etl", "--data-dir", dir.path().to_str().unwrap()],
        dir.path(),
    );
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: ADMISSIONS: file"), "{err}");

    let o = leakaudit(&["report"], dir.path());
    assert!(!o.status.success());
}
