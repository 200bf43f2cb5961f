//! The command-line front end, run as a child process.

use std::path::Path;
use std::process::{Command, Output};

fn sanbench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sanbench")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_validate_report_replay_probe() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = sanbench(&["run", "--variation", "move-repeat", "--games", "4", "--seed", "3", "--out", "out"], d);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).starts_with("4 games written"));

    let validate = sanbench(&["validate", "--out", "out"], d);
    assert_eq!(validate.status.code(), Some(0));
    assert!(stdout(&validate).contains("4 games audited, 0 issues"));

    let probe = sanbench(&["probe", "--out", "out"], d);
    assert!(probe.status.success(), "{}", String::from_utf8_lossy(&probe.stderr));
    assert!(d.join("out/probes.jsonl").exists());

    let report = sanbench(&["report", "--out", "out"], d);
    assert!(report.status.success());
    assert!(stdout(&report).contains("| Move-Repeat | 4 |"));
    assert!(d.join("out/report").read_dir().unwrap().count() > 3);

    let replay = sanbench(&["replay", "--out", "out", "--game", "2"], d);
    assert!(replay.status.success());
    let text = stdout(&replay);
    assert!(text.contains("[Round \"2\"]") && text.contains("Previous Moves:"));

    let missing = sanbench(&["replay", "--out", "out", "--game", "99"], d);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn validate_flags_a_tampered_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(sanbench(&["run", "--variation", "baseline", "--games", "2", "--out", "out"], d).status.success());
    let games = d.join("out/games.jsonl");
    let text = std::fs::read_to_string(&games).unwrap();
    std::fs::write(&games, text.replacen("\"verdict\":\"legal\"", "\"verdict\":\"illegal\"", 1)).unwrap();
    let validate = sanbench(&["validate", "--out", "out"], d);
    assert_eq!(validate.status.code(), Some(2));
    assert!(!stdout(&validate).contains(" 0 issues"));
}

#[test]
fn usage_errors_exit_one() {
    let d = std::env::temp_dir();
    assert_eq!(sanbench(&["frobnicate"], &d).status.code(), Some(1));
    assert_eq!(sanbench(&["run", "--variation", "Rsn-Tree", "--out", "x"], &d).status.code(), Some(1));
    assert_eq!(sanbench(&["--help"], &d).status.code(), Some(0));
    // a run needs a manifest or a variation
    assert_eq!(sanbench(&["run", "--out", "x"], &d).status.code(), Some(2));
}

#[test]
fn engine_can_be_this_binary_over_uci() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = sanbench(&["run", "--variation", "baseline", "--games", "2", "--engine", "self", "--out", "uci"], d);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let inproc = sanbench(&["run", "--variation", "baseline", "--games", "2", "--out", "local"], d);
    assert!(inproc.status.success());
    // the subprocess searches exactly like the in-process engine
    let games = |p: &str| std::fs::read_to_string(d.join(p).join("games.jsonl")).unwrap();
    assert_eq!(games("uci"), games("local"));
}
