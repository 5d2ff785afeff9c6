use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn reslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reslab")).args(args).output().expect("binary runs")
}

fn spec(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn solve_reports_reference_constants() {
    let o = reslab(&["solve", "--model", &spec("p1.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["alpha0"].as_f64().unwrap() - 1.5).abs() < 1e-8);
    assert!((v["phi_norm_sq"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-8);
    assert!(v["eigen_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn missing_and_malformed_specs_exit_2() {
    let o = reslab(&["solve", "--model", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read model spec"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"family\": \"hermite\", ").unwrap();
    let o = reslab(&["solve", "--model", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("malformed input"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(reslab(&["scan", "bw", "--h", ""]).status.code(), Some(2));
    assert_eq!(reslab(&["scan", "bw", "--alpha-exps", "x:y"]).status.code(), Some(2));
    assert_eq!(reslab(&["scan", "nonsense"]).status.code(), Some(2));
    assert_eq!(reslab(&["scan", "xsection", "--h", "0"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_reslab")).env("RESLAB_THREADS", "many").arg("solve").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn breit_wigner_scan_carries_the_lorentzian_target() {
    let o = reslab(&["scan", "bw", "--h", "0,1,2", "--alpha-exps=-2:-3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&stdout(&o));
    let h = header.iter().position(|c| c == "h").unwrap();
    let target = header.iter().position(|c| c == "target_re").unwrap();
    let err = header.iter().position(|c| c == "abs_error").unwrap();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let expect = 2.0 / (3.0 * PI * (r[h] * r[h] + 1.0));
        assert!((r[target] - expect).abs() < 1e-6 * expect, "{} vs {expect}", r[target]);
        assert!(r[err] < 5e-3);
    }
}

#[test]
fn coupling_equal_to_alpha0_is_dropped_with_a_warning() {
    let o = reslab(&["scan", "ssf", "--alphas", "1.5,1.6", "--h", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("dropped alpha0"));
    let (_, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][0] - 1.6).abs() < 1e-15);

    let o = reslab(&["scan", "ssf", "--alphas", "1.5", "--h", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let o = Command::new(env!("CARGO_BIN_EXE_reslab"))
            .env("RESLAB_THREADS", threads)
            .args(["scan", "flimits", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out.join("flimits.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert_eq!(a, b);
    let (header, rows) = csv(std::str::from_utf8(&a).unwrap());
    assert_eq!(header.len(), 9);
    assert_eq!(rows.len(), 30);
}

#[test]
fn three_d_scans_run_from_a_spec() {
    let s = spec("two_channel_3d.json");
    for kind in ["xsection", "rlimit", "delay"] {
        let o = reslab(&["scan", kind, "--model", &s, "--h", "0", "--alpha-exps=-3:-3"]);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        let (header, rows) = csv(&stdout(&o));
        assert_eq!(rows.len(), 2, "{kind}");
        let err = header.iter().position(|c| c.ends_with("error")).unwrap();
        assert!(rows.iter().all(|r| r[err] < 2e-2), "{kind}: {rows:?}");
    }
}

#[test]
fn survival_and_sojourn_tables() {
    let o = reslab(&["survival", "--t-max", "5", "--steps", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 11);
    // A(0) = ‖φ‖²
    assert!((rows[0][1] - 2.0 / 3.0).abs() < 1e-6);

    let o = reslab(&["sojourn", "--alpha-exps=-1:-2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv(&stdout(&o));
    let ratio = header.iter().position(|c| c == "ratio").unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[ratio] > 1.0));
}

#[test]
fn verify_subset_and_controlled_failures() {
    let o = reslab(&["verify", "--only", "pv-tail,plemelj"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    for v in &lines {
        for key in ["name", "value", "target", "tol", "pass"] {
            assert!(v.get(key).is_some(), "{key} missing");
        }
    }

    let o = reslab(&["verify", "--only", "pv-tail,model", "--tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    let failed = stdout(&o).lines().filter(|l| l.contains("\"pass\":false")).count();
    assert_eq!(failed, 2);

    assert_eq!(reslab(&["verify", "--only", "bogus"]).status.code(), Some(2));
}
