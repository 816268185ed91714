use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cpqr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpqr"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run cpqr")
}

fn error_record(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).expect("stderr is one JSON record")
}

#[test]
fn zero_distance_is_a_domain_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = cpqr(dir.path(), &["potential", "--z", "0", "--out", "v.csv"]);
    assert_eq!(out.status.code(), Some(3));
    let rec = error_record(&out);
    assert_eq!(rec["error"]["kind"], "domain");
    assert_eq!(rec["error"]["exit_code"], 3);
    assert!(!dir.path().join("v.csv").exists());
}

#[test]
fn exit_codes_by_class() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], i32)] = &[
        (&["reflect", "--material", "unobtainium"], 2),
        (&["reflect", "--height", "10cm", "--energy", "1e-12"], 2),
        (&["reflect", "--height=-1"], 3),
        (&["reflect", "--material", "tabulated"], 2),
        (&["reflect", "--material", "silica", "--thickness", "1e9m"], 6),
    ];
    for (args, code) in cases {
        let out = cpqr(dir.path(), args);
        assert_eq!(out.status.code(), Some(*code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn output_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = cpqr(dir.path(), &["curve", "--material", "silicon", "--points", "9", "--out", name]);
        assert!(out.status.success());
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("h_cm,probability\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn cached_and_uncached_agree() {
    let dir = tempfile::tempdir().unwrap();
    let probability = |extra: &[&str]| {
        let mut args = vec!["reflect", "--material", "silica", "--thickness", "5nm", "--format", "records"];
        args.extend(extra);
        let out = cpqr(dir.path(), &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["results"]["probability"].as_f64().unwrap()
    };
    let built = probability(&["--cache-dir", "c"]);
    let loaded = probability(&["--cache-dir", "c"]);
    let fresh = probability(&["--no-cache"]);
    assert!(std::fs::read_dir(dir.path().join("c")).unwrap().count() > 0);
    assert!((built - loaded).abs() <= 1e-10);
    assert!((built - fresh).abs() <= 1e-10);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# run settings\nratio_start = 2e4\ngravity_si = 9.806\n").unwrap();
    let out = cpqr(dir.path(), &["reflect", "--config", "run.cfg", "--ratio-switch", "50", "--no-cache", "--format", "records"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let controls = &v["config"]["controls"];
    assert_eq!(controls["ratio_start"].as_f64(), Some(2e4));
    assert_eq!(controls["ratio_switch"].as_f64(), Some(50.0));

    std::fs::write(dir.path().join("bad.cfg"), "ratio_start = fast\n").unwrap();
    let out = cpqr(dir.path(), &["reflect", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_text_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = cpqr(dir.path(), &["table1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("perfect") && text.contains("silica"));
}
