use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symflow")).args(args).current_dir(dir).output().unwrap()
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("golden.json", r#"{"k":2,"A":[[1,1],[1,0]]}"#),
        ("full2.json", r#"{"k":2,"A":[[1,1],[1,1]]}"#),
        ("g1.json", "[0, 1]"),
        ("h01.json", r#"{"memory":2,"table":{"01":1},"default":0}"#),
        ("susp.json", r#"{"base":{"k":2,"A":[[1,1],[1,1]]},"roof":[1,2]}"#),
        ("model.json", r#"{"f":{"c":1.9,"gamma":0.78},"H":{"a":0.5,"b":0.25},"lambda":[-3,-1,2]}"#),
        (
            "req.json",
            r#"{"sft":{"k":2,"A":[[1,1],[1,1]]},"g":[0,1],"alpha":0.3,"c":0.3054321,"tol_mean":1e-8,"tol_ent":1e-6}"#,
        ),
    ];
    for (name, body) in files {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn entropy_of_golden_mean() {
    let d = fixtures();
    let o = run(d.path(), &["entropy", "--sft", "golden.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("0.4812118"), "{out}");
}

#[test]
fn spectrum_outside_range_is_a_domain_error() {
    let d = fixtures();
    let o = run(d.path(), &["spectrum", "--sft", "full2.json", "--g", "g1.json", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.starts_with("error[outside_l_g]") && e.contains("outside L_g"), "{e}");
}

#[test]
fn malformed_input_exits_1() {
    let d = fixtures();
    std::fs::write(d.path().join("bad.json"), r#"{"k":2,"A":[[1,2],[1,1]]}"#).unwrap();
    let o = run(d.path(), &["entropy", "--sft", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[invalid_input]"));
    let o = run(d.path(), &["entropy", "--sft", "golden.json", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(d.path(), &["horseshoe", "--sft", "full2.json", "--measure", "m.json", "--eta", "0.1", "--zeta", "0.1"]);
    assert_eq!(o.status.code(), Some(1), "seed is mandatory");
}

#[test]
fn witness_then_verify_round_trip() {
    let d = fixtures();
    let o = run(d.path(), &["witness", "--request", "req.json", "--out", "w.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w = read_json(&d.path().join("w.json"));
    assert_eq!(w["report"]["pass"], true);
    assert_eq!(w["meta"]["tool"], "symflow");
    let o = run(d.path(), &["verify", "--measure", "w.json", "--out", "r.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&d.path().join("r.json"));
    let checks = r["report"]["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in ["ergodic", "full_support", "stationary", "mean:g", "level"] {
        assert!(names.contains(&n), "{names:?}");
    }
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn verify_flags_a_tampered_target() {
    let d = fixtures();
    assert!(run(d.path(), &["witness", "--request", "req.json", "--out", "w.json"]).status.success());
    let mut w = read_json(&d.path().join("w.json"));
    w["request"]["alpha"] = Value::from(0.35);
    std::fs::write(d.path().join("w2.json"), w.to_string()).unwrap();
    let o = run(d.path(), &["verify", "--measure", "w2.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[verification_failed]"));
}

#[test]
fn pressure_csv_matches_closed_form() {
    let d = fixtures();
    let o = run(d.path(), &["pressure", "--sft", "full2.json", "--g", "g1.json", "--grid", "-2,2,5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,pressure,mean,entropy"));
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[1] - (1.0 + f[0].exp()).ln()).abs() < 1e-10);
    }
}

#[test]
fn spectrum2d_and_rotation_set_emit_json() {
    let d = fixtures();
    let args = ["spectrum2d", "--sft", "full2.json", "--g", "g1.json", "--h", "h01.json", "--alpha", "0.5,0.25", "--out", "s.json"];
    assert!(run(d.path(), &args).status.success());
    let s = read_json(&d.path().join("s.json"));
    let h = s["records"][0]["H"].as_f64().unwrap();
    assert!((h - 2f64.ln()).abs() < 1e-10);
    assert!(s["rotation_set"]["inner_area"].as_f64().unwrap() > 0.2);
    let o = run(d.path(), &["rotation-set", "--sft", "full2.json", "--g", "g1.json", "--h", "h01.json", "--out", "r.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&d.path().join("r.json"));
    assert!((r["inner_area"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn flow_commands() {
    let d = fixtures();
    assert!(run(d.path(), &["flow-entropy", "--suspension", "susp.json", "--out", "f.json"]).status.success());
    let f = read_json(&d.path().join("f.json"));
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((f["flow_entropy"].as_f64().unwrap() - golden).abs() < 1e-8);
    let o = run(d.path(), &["flow-spectrum", "--suspension", "susp.json", "--phi", "g1.json", "--alpha", "0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("alpha,H,beta,s,witness_entropy,witness_mean,status\n"));
    let o = run(d.path(), &["flow-spectrum", "--suspension", "susp.json", "--phi", "g1.json", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lorenz_commands() {
    let d = fixtures();
    assert!(run(d.path(), &["lorenz-validate", "--model", "model.json", "--grid", "200", "--out", "v.json"]).status.success());
    assert_eq!(read_json(&d.path().join("v.json"))["pass"], true);
    let o = run(d.path(), &["lorenz-simulate", "--model", "model.json", "--x0", "0.3", "--y0", "0", "--n", "10", "--stats", "st.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 11);
    assert!(read_json(&d.path().join("st.json"))["exponent"].as_f64().unwrap() > 2f64.sqrt().ln());
    let o = run(d.path(), &["lorenz-simulate", "--model", "model.json", "--x0", "0", "--y0", "0", "--n", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[singular_initial_point]"));
}

#[test]
fn job_config_runs_and_rejects_unknown_keys() {
    let d = fixtures();
    std::fs::write(
        d.path().join("job.json"),
        r#"{"command":"spectrum2d","args":{"sft":"full2.json","g":"g1.json","h":"h01.json","alpha":[[0.5,0.25],[0.4,0.2]]},"output":"out.json"}"#,
    )
    .unwrap();
    let o = run(d.path(), &["run", "--config", "job.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = read_json(&d.path().join("out.json"));
    assert_eq!(out["records"].as_array().unwrap().len(), 2);
    assert_eq!(out["meta"]["config_sha256"].as_str().unwrap().len(), 64);

    std::fs::write(d.path().join("bad.json"), r#"{"command":"entropy","args":{"sft":"golden.json"},"extra":1}"#).unwrap();
    assert_eq!(run(d.path(), &["run", "--config", "bad.json"]).status.code(), Some(1));
    std::fs::write(d.path().join("bad2.json"), r#"{"command":"entropy","args":{"sft":"golden.json","depth":3}}"#).unwrap();
    assert_eq!(run(d.path(), &["run", "--config", "bad2.json"]).status.code(), Some(1));
}

#[test]
fn failed_command_leaves_no_output_file() {
    let d = fixtures();
    let o = run(d.path(), &["spectrum", "--sft", "full2.json", "--g", "g1.json", "--alpha", "0.3,1.5", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.path().join("x.csv").exists());
}
