use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tame");

const HEADER: &str = r#"
version = 1
seed = 11

[[models]]
id = "trig"
kind = "trig"
modes = 8
levels = 3

[[operators]]
id = "d"
op = "derivative"
model = "trig"
"#;

const CERTIFY: &str = r#"
[[tasks]]
id = "cert"
task = "certify"
operator = "d"
r = 1
b = 0
"#;

fn scan(expect: Option<&str>) -> String {
    let expect = expect.map(|e| format!("expect = \"{e}\"\n")).unwrap_or_default();
    format!("\n[[tasks]]\nid = \"ladder\"\ntask = \"scan\"\n{expect}r = 0\nladder = [8, 16, 32]\nlevels = 1\n")
}

fn tame(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    let out = dir.join("out");
    Command::new(BIN)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report_lines(dir: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(dir.join("out/report.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn certify_derivative_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), &format!("{HEADER}{CERTIFY}"), &["tame", "certify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines = report_lines(dir.path());
    assert_eq!(lines.len(), 1);
    let r = &lines[0]["results"];
    assert_eq!(r["r"], 1);
    assert_eq!(r["b"], 0);
    let k = r["K"].as_array().unwrap();
    assert!(!k.is_empty());
    assert!(k.iter().all(|x| x.as_f64().unwrap() <= 1.0 + 1e-9));
    assert_eq!(lines[0]["status"], "ok");
}

#[test]
fn expected_diverging_scan_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), &format!("{HEADER}{}", scan(Some("diverging"))), &["tame", "scan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = &report_lines(dir.path())[0];
    assert_eq!(line["status"], "expected_negative");
    assert_eq!(line["results"]["evidence"]["verdict"], "diverging_fit");
}

#[test]
fn unmarked_diverging_scan_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), &format!("{HEADER}{}", scan(None)), &["report"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report_lines(dir.path())[0]["status"], "failed");
}

#[test]
fn empty_task_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), HEADER, &["report"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("out/report.jsonl")).unwrap(), "");
}

#[test]
fn config_errors_exit_two_and_list_everything() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), &HEADER.replace("version = 1", "version = 999"), &["report"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("999"));

    let broken = format!("{HEADER}{CERTIFY}").replace("model = \"trig\"", "model = \"missing\"").replace("seed = 11", "");
    let o = tame(dir.path(), &broken, &["report"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("undefined model `missing`"), "{err}");
    assert!(err.contains("no seed"), "{err}");
}

#[test]
fn seed_flag_supplies_missing_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{HEADER}{CERTIFY}").replace("seed = 11", "");
    let o = tame(dir.path(), &cfg, &["--seed", "5", "tame", "certify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report_lines(dir.path())[0]["provenance"]["seed"], 5);
}

#[test]
fn csv_ladder_has_fit_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), &format!("{HEADER}{}", scan(Some("diverging"))), &["--format", "csv", "tame", "scan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/ladder.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,K_n,fit"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row[1] >= row[0]);
        assert!(row[2] > 0.0);
    }
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert!(summary.starts_with("task,kind,status,expect,seed,truncation,error"));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = format!("{HEADER}{CERTIFY}{}", scan(Some("diverging")));
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(tame(a.path(), &cfg, &["report"]).status.success());
    assert!(tame(b.path(), &cfg, &["report"]).status.success());
    let read = |d: &Path| fs::read(d.join("out/report.jsonl")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn model_build_writes_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let o = tame(dir.path(), HEADER, &["model", "build"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/models.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["dim"], 17);
    assert_eq!(lines[0]["checksum"].as_str().unwrap().len(), 64);
}

#[test]
fn shipped_demo_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml");
    let o = Command::new(BIN).arg("--config").arg(&root).arg("--out").arg(dir.path()).arg("report").output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}
