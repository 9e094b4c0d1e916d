use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tangle-sim"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn last_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).lines().last().unwrap_or_default().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn simulate_writes_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let src = scenario("double_spend.json");
    let mut csvs = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let o = run(&["simulate", src.to_str().unwrap(), "--runs", "8", "--workers", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["runs"], 8);
        assert_eq!(summary["kind"], "tangle-reduced");
        csvs.push(["L.csv", "X.csv", "W.csv", "N.csv"].map(|f| std::fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(csvs[0], csvs[1]);
    let header = String::from_utf8_lossy(&csvs[0][0]).lines().next().unwrap().to_string();
    assert!(header.starts_with("t,mean_L_1,std_L_1,p5_L_1,p95_L_1"), "{header}");
}

#[test]
fn simulate_other_kinds() {
    let dir = tempfile::tempdir().unwrap();
    for (file, csv) in [
        ("fluid_single.json", "fluid.csv"),
        ("compliance_ring.json", "compliance.csv"),
        ("junction_fixed.json", "junction.csv"),
        ("stability_ring.json", "stability.json"),
    ] {
        let out = dir.path().join(file);
        let o = run(&["simulate", scenario(file).to_str().unwrap(), "--runs", "4", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{file}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(csv).exists(), "{file}");
        assert!(out.join("summary.json").exists());
    }
}

#[test]
fn validate_exit_codes() {
    let o = run(&[
        "validate",
        scenario("tangle_agent.json").to_str().unwrap(),
        scenario("tangle_reduced.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(last_line(&o), "PASS");

    let dir = tempfile::tempdir().unwrap();
    let agent = write(
        dir.path(),
        "agent.json",
        r#"{"kind": "tangle-agent", "seed": 1, "runs": 60, "horizon": 40, "lambda": 20, "h": 3, "dt_out": 1}"#,
    );
    let reduced = write(
        dir.path(),
        "reduced.json",
        r#"{"kind": "tangle-reduced", "seed": 2, "runs": 60, "horizon": 40, "lambda": 20, "h": 5, "dt_out": 1}"#,
    );
    let o = run(&["validate", agent.to_str().unwrap(), reduced.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(last_line(&o), "FAIL");
}

#[test]
fn stability_exit_codes() {
    let o = run(&["stability", scenario("networks/ring_stable.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(last_line(&o), "PASS");
    let o = run(&["stability", scenario("networks/ring_strong.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(last_line(&o), "FAIL");
    let o = run(&["stability", scenario("networks/pair.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn roots_reports_counts() {
    let o = run(&["roots", "zero-sum-mode:h=2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 1);
    let o = run(&["roots", "poly:1,0,-1", "--re-min", "-2", "--re-max", "2", "--im-min", "-1", "--im-max", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 2);
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["simulate", missing.to_str().unwrap()])), 2);
    let typo = write(
        dir.path(),
        "typo.json",
        r#"{"kind": "tangle-reduced", "horizon": 10, "lambda": 5, "h": 1, "lamda": 5}"#,
    );
    let o = run(&["simulate", typo.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));
    assert_eq!(code(&run(&["roots", "cubic:1"])), 2);
    assert_eq!(code(&run(&["stability", typo.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}
