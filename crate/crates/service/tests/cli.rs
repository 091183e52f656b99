use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/study")
}

fn cognitrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cognitrace"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_the_fixture() {
    let config = fixtures().join("session.toml");
    let events = fixtures().join("events.toml");
    let o = cognitrace(&["validate", "--config", path(&config), "--events", path(&events)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("6 steps, 7 stages, 13 phases, 4 tasks"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("  ")).count(), 13);

    let o = cognitrace(&["validate", "--workflow", path(&fixtures().join("workflow.toml"))]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn validate_reports_script_problems() {
    let tmp = tempfile::tempdir().unwrap();
    let events = tmp.path().join("events.toml");
    std::fs::write(&events, "[[events]]\nphase = \"nowhere\"\nafter = 1.0\naction = \"complete\"\n").unwrap();
    let config = fixtures().join("session.toml");
    let o = cognitrace(&["validate", "--config", path(&config), "--events", path(&events)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("nowhere"), "{}", stderr(&o));
}

#[test]
fn missing_config_fails_with_its_path() {
    let o = cognitrace(&["validate", "--config", "/no/such/session.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/no/such/session.toml"), "{}", stderr(&o));
}

#[test]
fn analyze_of_a_session_without_gaze_writes_only_the_header() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("aborted");
    let events = tmp.path().join("events.toml");
    std::fs::write(&events, "[[events]]\nphase = \"pre\"\nafter = 0.5\naction = \"abort\"\n").unwrap();
    let config = fixtures().join("session.toml");
    let o = cognitrace(&["record", "--config", path(&config), "--events", path(&events), "--out", path(&dir)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = cognitrace(&["analyze", path(&dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "{csv}");
    assert!(csv.starts_with("symbol_id,"), "{csv}");
}

#[test]
fn record_analyze_and_heatmap_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("session");
    let config = fixtures().join("session.toml");
    let events = fixtures().join("events.toml");
    let o = cognitrace(&["record", "--config", path(&config), "--events", path(&events), "--out", path(&dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.join("manifest.toml").is_file());

    let o = cognitrace(&["analyze", path(&dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert!(csv.lines().count() > 1);

    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = cognitrace(&["heatmap", path(&dir), "--out", path(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["overlay.csv", "heatmap.html"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }

    let o = cognitrace(&["heatmap", path(&dir), "--script", "norm(", "--out", path(&a)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("1:"), "{}", stderr(&o));
}

#[test]
fn simulate_runs_for_the_requested_time() {
    let o = cognitrace(&["simulate", "--seed", "3", "--duration", "0.3", "--discovery-port", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains("samples sent")).count(), 5, "{out}");
}
