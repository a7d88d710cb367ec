use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fctool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fctool"))
        .arg("--quiet")
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn upper_bound_prints_the_value() {
    let tmp = TempDir::new().unwrap();
    let o = fctool(
        tmp.path(),
        &[
            "upperbound",
            "-k",
            "3",
            "-n",
            "8",
            "--base-n",
            "7",
            "--base-m",
            "4",
        ],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "6");
}

#[test]
fn single_triple_is_nonfc_and_certificate_verifies() {
    let tmp = TempDir::new().unwrap();
    let fam = write(tmp.path(), "three_set.fam", "1,2,3\n");
    let o = fctool(tmp.path(), &["isfc", &fam]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("Non-FC"));
    let cert = tmp.path().join("three_set.cert.json");
    assert!(cert.exists());
    let v = fctool(tmp.path(), &["verify", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("PASS"));
}

#[test]
fn pair_is_fc() {
    let tmp = TempDir::new().unwrap();
    let fam = write(tmp.path(), "pair.fam", "n=2\n1,2\n");
    let o = fctool(tmp.path(), &["isfc", &fam]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("FC"));
}

#[test]
fn tampered_certificate_fails_with_exit_one() {
    let tmp = TempDir::new().unwrap();
    let fam = write(tmp.path(), "pair.fam", "1,2\n");
    let cert = tmp.path().join("pair.cert.json");
    assert!(fctool(tmp.path(), &["isfc", &fam]).status.success());
    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.contains("\"1/2\""));
    fs::write(&cert, text.replacen("\"1/2\"", "\"1/3\"", 1)).unwrap();
    let v = fctool(tmp.path(), &["verify", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("FAIL"));
}

#[test]
fn malformed_inputs_exit_two() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.fam", "1,x\n");
    assert_eq!(fctool(tmp.path(), &["isfc", &bad]).status.code(), Some(2));
    let junk = write(tmp.path(), "junk.json", "{\"kind\": 3}");
    assert_eq!(
        fctool(tmp.path(), &["verify", &junk]).status.code(),
        Some(2)
    );
    assert_eq!(
        fctool(tmp.path(), &["no-such-command"]).status.code(),
        Some(2)
    );
    assert_eq!(
        fctool(tmp.path(), &["upperbound", "-k", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn translates_reports_regular_bound() {
    let tmp = TempDir::new().unwrap();
    let o = fctool(tmp.path(), &["translates", "-n", "4", "--r", "0,1,3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("32 sets on 16 elements, degree 6"), "{out}");
    assert!(out.contains("FC by regular 3-set bound"), "{out}");
}

#[test]
fn fc_value_for_triples_on_five_points() {
    let tmp = TempDir::new().unwrap();
    let o = fctool(tmp.path(), &["fcvalue", "-k", "3", "-n", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("FC(3, 5) = 3"));
}

#[test]
fn getnfc_save_writes_manifest_and_certificates() {
    let tmp = TempDir::new().unwrap();
    let o = fctool(
        tmp.path(),
        &["getnfc", "-n", "4", "-k", "3", "-m", "2", "--save"],
    );
    assert!(o.status.success());
    assert!(tmp.path().join("manifest.json").exists());
    let level = tmp.path().join("n4_k3_m2");
    assert!(level.join("0001.fam").exists());
    let cert = level.join("0001.cert.json");
    let v = fctool(tmp.path(), &["verify", cert.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn lexscan_writes_both_certificates() {
    let tmp = TempDir::new().unwrap();
    let o = fctool(tmp.path(), &["lexscan", "-k", "3", "-n", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("first FC prefix: m = 3"));
    for m in [2, 3] {
        let cert = tmp.path().join(format!("lex_k3_n5_m{m}.cert.json"));
        let v = fctool(tmp.path(), &["verify", cert.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "m={m}");
    }
}

#[test]
fn vfc_value_with_no_singletons() {
    let tmp = TempDir::new().unwrap();
    let o = fctool(
        tmp.path(),
        &["vfcvalue", "-k", "5", "-n", "6", "--v", "no-singletons"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("FC_V(5, 6) = 3"));
}

#[test]
fn canon_agrees_on_relabelings() {
    let tmp = TempDir::new().unwrap();
    let a = write(tmp.path(), "a.fam", "1,2,3\n1,4,5\n");
    let b = write(tmp.path(), "b.fam", "2,4,5\n1,3,5\n");
    let ca = fctool(tmp.path(), &["canon", &a]);
    let cb = fctool(tmp.path(), &["canon", &b]);
    let body = |o: &Output| -> String {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&ca), body(&cb));
}
