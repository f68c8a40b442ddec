use std::fs;
use std::process::{Command, Output};

fn lqtraj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqtraj")).args(args).output().expect("spawn lqtraj")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const QUICK_HO: [&str; 7] = ["ho-position", "--grid", "0:1:3", "--dim", "30", "--trajectories", "2"];

#[test]
fn csv_to_stdout() {
    let o = lqtraj(&QUICK_HO);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("abscissa,value,stderr,method"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[0].ends_with(",,closed-form"));
    assert!(rows[8].ends_with(",monte-carlo"));
}

#[test]
fn json_to_file_and_seed_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, threads) in [(&a, "1"), (&b, "3")] {
        let mut args = QUICK_HO.to_vec();
        args.extend(["--format", "json", "--seed", "7", "--threads", threads, "--out", p.to_str().unwrap()]);
        let o = lqtraj(&args);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.contains("\"abscissa\"") && text.contains("\"stderr\": null") && text.contains("\"method\": \"monte-carlo\""));
}

#[test]
fn oracle_off_drops_the_cross_checks() {
    let mut args = QUICK_HO.to_vec();
    args.extend(["--oracle", "off"]);
    let out = String::from_utf8(lqtraj(&args).stdout).unwrap();
    assert!(!out.contains("monte-carlo"));
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn config_file_with_command_line_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "grid = \"0:1:3\"\ndim = 30\noracle = false\nr = 0.5\nformat = \"json\"\n").unwrap();
    let o = lqtraj(&["ho-position", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("abscissa,"));
    assert_eq!(out.lines().count(), 7);
    let with_r1 = String::from_utf8(lqtraj(&["ho-position", "--grid", "0:1:3", "--oracle", "off"]).stdout).unwrap();
    assert_ne!(out, with_r1);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "dimension = 30\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["no-such-experiment"],
        vec!["ho-position", "--grid", "0:1"],
        vec!["ho-position", "--dim", "1"],
        vec!["ho-position", "--dt", "-1"],
        vec!["momentum-linear", "--grid", "0:1:4", "--dt", "0.3"],
        vec!["fig1-qnd", "--format", "xml"],
        vec!["fig1-qnd", "--oracle", "maybe"],
        vec!["validate", "--only", "12"],
        vec!["ho-position", "--config", cfg.to_str().unwrap()],
        vec!["ho-position", "--config", "/nonexistent/run.toml"],
    ];
    for args in cases {
        let o = lqtraj(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn validate_subset_reports_and_passes() {
    let o = lqtraj(&["validate", "--only", "9,8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8(o.stdout).unwrap();
    let heads: Vec<&str> = out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(heads.len(), 2);
    assert!(heads[0].contains("coherent-identities") && heads[1].contains("z-invariance"));
}

#[test]
fn help_documents_config_keys_and_exit_codes() {
    let out = String::from_utf8(lqtraj(&["--help"]).stdout).unwrap();
    for key in ["quadrature_order", "coherent_mean", "threads", "--trajectories", "EXIT CODES"] {
        assert!(out.contains(key), "{key}");
    }
}
