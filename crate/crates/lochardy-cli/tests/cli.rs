use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn out_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lochardy-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn lochardy(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lochardy"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn space_reports_growth_and_rejects_bad_metrics() {
    let out = out_dir("space");
    let ok = lochardy(&["space", fixture("p40.json").to_str().unwrap()], &out);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("growth.json")).unwrap()).unwrap();
    assert_eq!(report["space"], "P40");
    let bad = lochardy(&["space", fixture("triangle_violation.json").to_str().unwrap()], &out);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).to_lowercase().contains("triangle"));
}

#[test]
fn zero_tent_field_gives_empty_atom_file() {
    let out = out_dir("zero");
    let o = lochardy(&["decompose", "t1", fixture("p40.json").to_str().unwrap(), fixture("zero_tent.json").to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let atoms: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(out.join("atoms.json")).unwrap()).unwrap();
    assert!(atoms.is_empty());
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (out_dir("det-a"), out_dir("det-b"));
    for d in [&a, &b] {
        let o = lochardy(&["cover", "vitali", fixture("p40.json").to_str().unwrap(), "--seed", "7"], d);
        assert!(o.status.success());
        let o = lochardy(&["calculus", "path:12", fixture("function.json").to_str().unwrap(), "--seed", "3"], d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["vitali.json", "field.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn calculus_routes_agree() {
    let out = out_dir("routes");
    let f = fixture("function.json");
    let mut fields = Vec::new();
    for route in ["contour", "spectral"] {
        let o = lochardy(&["calculus", "cycle:9", f.to_str().unwrap(), "--route", route], &out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Vec<[f64; 2]> = serde_json::from_str(&fs::read_to_string(out.join("field.json")).unwrap()).unwrap();
        fields.push(v);
    }
    for (x, y) in fields[0].iter().zip(&fields[1]) {
        assert!((x[0] - y[0]).abs() < 1e-8 && (x[1] - y[1]).abs() < 1e-8);
    }
}

#[test]
fn offdiag_and_hardy_write_reports() {
    let out = out_dir("reports");
    let o = lochardy(&["offdiag", "path:15"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert!(csv.lines().count() > 12 && csv.contains("fitted"));
    let o = lochardy(&["hardy", "path:12", "--corpus", "3", "--grid", "0.84,24"], &out);
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(out.join("molecules.json").exists() && out.join("hardy.csv").exists());
}

#[test]
fn verify_lists_requested_criteria() {
    let out = out_dir("verify");
    let o = lochardy(&["verify", "--only", "2,4,5,7"], &out);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    for id in ["2", "4", "5", "7"] {
        assert!(text.lines().any(|l| l.starts_with("PASS") && l[4..].trim_start().starts_with(id)), "{text}");
    }
    assert!(text.contains("4 of 4 criteria passed"));
}

#[test]
fn usage_errors_exit_nonzero() {
    let out = out_dir("usage");
    assert!(!lochardy(&["frobnicate"], &out).status.success());
    assert!(!lochardy(&["verify", "--grid", "nonsense"], &out).status.success());
    assert!(!lochardy(&["offdiag", "path:5", "--source", "99"], &out).status.success());
}
