use std::fs;
use std::io::Write;
use std::path::Path;

use actin_core::sweep::{self, RuleRange, SweepConfig, SweepParts, METRICS_FILE, LOCALIZATION_FILE, MANIFEST_FILE};
use actin_core::Error;

fn small(dir: &Path, rules: &str) -> SweepConfig {
    SweepConfig {
        n: 40,
        tau: 30,
        runs_per_rule: 2,
        localization_n: 40,
        localization_tau: 200,
        rules: rules.parse().unwrap(),
        out_dir: Some(dir.to_path_buf()),
        ..SweepConfig::default()
    }
}

fn quiet(_: &str, _: usize, _: usize) {}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn range_sweep_writes_one_row_per_rule() {
    let dir = tempfile::tempdir().unwrap();
    sweep::run_sweep(&small(dir.path(), "0..63"), SweepParts::BOTH, quiet).unwrap();
    let m = lines(&dir.path().join(METRICS_FILE));
    let l = lines(&dir.path().join(LOCALIZATION_FILE));
    assert_eq!(m[0], sweep::METRICS_HEADER);
    assert_eq!(l[0], sweep::LOCALIZATION_HEADER);
    assert_eq!(m.len(), 65);
    assert_eq!(l.len(), 65);
    assert_eq!(m[1].split(',').take(2).collect::<Vec<_>>(), ["0", "0"]);
    assert_eq!(m[64].split(',').take(2).collect::<Vec<_>>(), ["1", "31"]);
    let bytes = fs::read(dir.path().join(METRICS_FILE)).unwrap();
    assert!(!bytes.contains(&b'\r'));
}

#[test]
fn second_run_is_noop() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path(), "0..15");
    let first = sweep::run_sweep(&config, SweepParts::BOTH, quiet).unwrap();
    assert_eq!(first.metrics_computed, 16);
    let before = fs::read(dir.path().join(METRICS_FILE)).unwrap();
    let second = sweep::run_sweep(&config, SweepParts::BOTH, quiet).unwrap();
    assert!(second.is_noop());
    assert_eq!(fs::read(dir.path().join(METRICS_FILE)).unwrap(), before);
}

#[test]
fn resumes_after_partial_range_and_torn_row() {
    let fresh = tempfile::tempdir().unwrap();
    sweep::run_sweep(&small(fresh.path(), "0..63"), SweepParts::BOTH, quiet).unwrap();

    let dir = tempfile::tempdir().unwrap();
    sweep::run_sweep(&small(dir.path(), "0..31"), SweepParts::BOTH, quiet).unwrap();
    let manifest = sweep::Manifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.metrics_completed, vec![RuleRange::new(0, 31).unwrap()]);
    // simulate a crash in the middle of writing the next row
    let mut f = fs::OpenOptions::new().append(true).open(dir.path().join(METRICS_FILE)).unwrap();
    f.write_all(b"1,0,3.1").unwrap();
    drop(f);

    let report = sweep::run_sweep(&small(dir.path(), "0..63"), SweepParts::BOTH, quiet).unwrap();
    assert_eq!(report.metrics_computed, 32);
    assert_eq!(report.localization_computed, 32);
    for file in [METRICS_FILE, LOCALIZATION_FILE] {
        assert_eq!(fs::read(dir.path().join(file)).unwrap(), fs::read(fresh.path().join(file)).unwrap(), "{file}");
    }
    let manifest = sweep::Manifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.metrics_completed, vec![RuleRange::new(0, 63).unwrap()]);
}

#[test]
fn config_change_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    sweep::run_sweep(&small(dir.path(), "0..3"), SweepParts::BOTH, quiet).unwrap();
    let altered = SweepConfig { tau: 31, ..small(dir.path(), "0..3") };
    match sweep::run_sweep(&altered, SweepParts::BOTH, quiet) {
        Err(Error::ConfigMismatch { .. }) => {}
        other => panic!("expected hash mismatch, got {other:?}"),
    }
}

#[test]
fn serial_and_parallel_agree_with_in_memory_sweep() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let serial = SweepConfig { workers: 1, ..small(a.path(), "100..163") };
    let parallel = SweepConfig { workers: 4, ..small(b.path(), "100..163") };
    sweep::run_sweep(&serial, SweepParts::BOTH, quiet).unwrap();
    sweep::run_sweep(&parallel, SweepParts::BOTH, quiet).unwrap();
    for file in [METRICS_FILE, LOCALIZATION_FILE] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap());
    }
    let rows = sweep::run_metrics_sweep(&serial).unwrap();
    let text: Vec<String> = rows.iter().map(sweep::metrics_line).collect();
    assert_eq!(text, lines(&a.path().join(METRICS_FILE))[1..]);
    let counts = sweep::run_localization_sweep(&parallel).unwrap();
    let text: Vec<String> = counts.iter().map(sweep::localization_line).collect();
    assert_eq!(text, lines(&b.path().join(LOCALIZATION_FILE))[1..]);
}

#[test]
fn flooding_rules_have_no_localizations() {
    let dir = tempfile::tempdir().unwrap();
    // indices 512.. all have f[0][0] = 1
    sweep::run_sweep(&small(dir.path(), "512..543"), SweepParts { metrics: false, localization: true }, quiet).unwrap();
    for row in sweep::read_localization_csv(&dir.path().join(LOCALIZATION_FILE)).unwrap() {
        assert_eq!((row.travelling, row.stationary), (0, 0));
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let config = small(&blocker.join("sub"), "0..1");
    assert!(matches!(sweep::run_sweep(&config, SweepParts::BOTH, quiet), Err(Error::Io(_))));
}
