use std::path::Path;
use std::process::{Command, Output};

fn mb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxbisect")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn builtin_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let bp = dir.path().join("dstar.bp");
    let o = mb(&["builtin", "dstar", "--out", p(&bp)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("dstar.bp.manifest.json").exists());

    let o = mb(&["eval", "--blueprint", p(&bp)]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("soundness/c_gw   [0.878523"), "{s}");
    assert!(s.contains("balance residual"));

    let same = mb(&["eval", "--blueprint", "dstar"]);
    assert_eq!(stdout(&same), s);
}

#[test]
fn certify_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.cert");
    let manifest = dir.path().join("run.json");
    let o = mb(&["--manifest", p(&manifest), "certify", "--blueprint", "dstar", "--bound", "0.8795", "--max-depth", "24", "--quiet", "--out", p(&cert)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "certify");
    let sha = m["outputs"][p(&cert)].as_str().unwrap();
    assert_eq!(sha, maxbisect::cli::sha256_hex(&std::fs::read(&cert).unwrap()));

    let o = mb(&["replay", p(&cert), "--stride", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("replay ok: verified"));

    // A truncated certificate no longer tiles the domain.
    let text = std::fs::read_to_string(&cert).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut = dir.path().join("cut.cert");
    std::fs::write(&cut, lines[..lines.len() - 1].join("\n") + "\n").unwrap();
    let o = mb(&["replay", p(&cut)]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn refuted_bound_exits_two() {
    let o = mb(&["certify", "--blueprint", "dstar", "--bound", "0.8785", "--max-depth", "20", "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn errors_exit_one() {
    assert_eq!(mb(&["eval", "--blueprint", "/nonexistent/blueprint"]).status.code(), Some(1));
    assert_eq!(mb(&["builtin", "other"]).status.code(), Some(1));
    assert_eq!(mb(&["contour", "--blueprint", "dstar", "--grid", "0"]).status.code(), Some(1));
    assert_eq!(mb(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(mb(&["eval", "--blueprint", "dstar", "--thresholds", "t9 = 0.1"]).status.code(), Some(1));
}

#[test]
fn contour_csv() {
    let o = mb(&["contour", "--blueprint", "dstar", "--grid", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 1 + 12 * 12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("components above 0.8784"));
}

#[test]
fn taylor_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = mb(&["taylor", "--csv", p(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("MISMATCH"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 14);
}

#[test]
fn discretize_then_audit() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.inst");
    let o = mb(&["discretize", "--blueprint", "dstar", "--dim", "3", "--eps", "0.3", "--samples", "20000", "--out", p(&inst)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mb(&["audit", p(&inst)]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    assert!(!stdout(&o).is_empty());
}
