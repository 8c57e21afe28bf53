use std::path::Path;
use std::process::Command;

fn qhtree(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_qhtree"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn qhtree");
    out
}

fn ok(args: &[&str]) -> String {
    let out = qhtree(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (p(dir.path(), "a.csv"), p(dir.path(), "b.csv"));
    ok(&["synth", "--kind", "separable", "--n", "100", "--seed", "1", "--out", &a]);
    ok(&["synth", "--kind", "separable", "--n", "100", "--seed", "1", "--out", &b]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let one = p(dir.path(), "one.csv");
    ok(&["synth", "--kind", "gaussian-mix", "--n", "1", "--out", &one]);
    assert_eq!(std::fs::read_to_string(&one).unwrap().lines().count(), 1);

    assert!(!qhtree(&["synth", "--kind", "spiral", "--n", "5", "--out", &one]).status.success());
}

#[test]
fn train_writes_report_curve_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "synth", "--kind", "separable", "--n", "20000", "--seed", "3", "--out", &p(d, "d.csv"),
        "--schema-out", &p(d, "s.json"),
    ]);
    let stdout = ok(&[
        "train", "--schema", &p(d, "s.json"), "--data", &p(d, "d.csv"), "--report", &p(d, "r.json"),
        "--curve", &p(d, "c.csv"), "--dump", &p(d, "tree.txt"),
    ]);
    assert!(stdout.starts_with("accuracy"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p(d, "r.json")).unwrap()).unwrap();
    assert_eq!(report["samples_seen"], 20000);
    let acc = report["accuracy"].as_f64().unwrap();
    let correct = report["correct"].as_f64().unwrap();
    assert_eq!(acc, correct / 20000.0);
    assert!(acc >= 0.95);
    assert!(report["splits"].as_u64().unwrap() >= 1);
    let curve = std::fs::read_to_string(p(d, "c.csv")).unwrap();
    assert_eq!(curve.lines().count(), 3);
    assert!(std::fs::read_to_string(p(d, "tree.txt")).unwrap().contains("x0 <="));

    // same config, same data, same report
    ok(&["train", "--schema", &p(d, "s.json"), "--data", &p(d, "d.csv"), "--report", &p(d, "r2.json")]);
    assert_eq!(std::fs::read(p(d, "r.json")).unwrap(), std::fs::read(p(d, "r2.json")).unwrap());

    ok(&[
        "train", "--schema", &p(d, "s.json"), "--data", &p(d, "d.csv"), "--observer", "gaussian",
        "--fixed-point", "--report", &p(d, "g.json"),
    ]);
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p(d, "g.json")).unwrap()).unwrap();
    assert_eq!(g["observer"], "gaussian");

    let bad = qhtree(&["train", "--schema", &p(d, "s.json"), "--data", &p(d, "d.csv"), "--quantiles", "1"]);
    assert!(!bad.status.success());
}

#[test]
fn parse_error_reports_sample_index() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(p(d, "s.json"), r#"{"attributes":[{"name":"x","kind":"numeric"}],"labels":2}"#).unwrap();
    std::fs::write(p(d, "d.csv"), "0.1,0\n0.2,1\nbogus,1\n").unwrap();
    let out = qhtree(&["train", "--schema", &p(d, "s.json"), "--data", &p(d, "d.csv")]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sample 2"), "{err}");
}

#[test]
fn sweep_records_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "synth", "--kind", "gaussian-mix", "--n", "3000", "--out", &p(d, "d.csv"), "--schema-out", &p(d, "s.json"),
    ]);
    ok(&[
        "sweep", "--schema", &p(d, "s.json"), "--data", &p(d, "d.csv"), "--quantiles", "1,2,8", "--out",
        &p(d, "sweep.csv"),
    ]);
    let text = std::fs::read_to_string(p(d, "sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "quantiles,accuracy,error");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,,"));
    assert!(lines[2].starts_with("2,0."));
}

#[test]
fn normalize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        p(d, "s.json"),
        r#"{"attributes":[{"name":"a","kind":"numeric"},{"name":"c","kind":"categorical","values":3}],"labels":2}"#,
    )
    .unwrap();
    std::fs::write(p(d, "in.csv"), "a,c,label\n0,2,1\n5,0,0\n10,1,1\n").unwrap();
    ok(&[
        "normalize", "--schema", &p(d, "s.json"), "--in", &p(d, "in.csv"), "--out", &p(d, "out.csv"), "--stats",
        &p(d, "stats.json"), "--header",
    ]);
    let out = std::fs::read_to_string(p(d, "out.csv")).unwrap();
    assert_eq!(out, "a,c,label\n-1,2,1\n0,0,0\n1,1,1\n");
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p(d, "stats.json")).unwrap()).unwrap();
    assert_eq!(stats["attributes"][0]["max"], 10.0);
}

#[test]
fn cost_matches_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "cost.json");
    let stdout = ok(&[
        "cost", "--labels", "7", "--numeric", "10", "--categorical", "44", "--values", "2x44", "--quantiles", "8",
        "--elements", "1024", "--depth", "15", "--freq", "170", "--samples", "581012", "--out", &out,
    ]);
    assert!(stdout.contains("dsp         1126"));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["latency_cycles"], 55);
    assert_eq!(r["dsp"]["overall"], 1126);
    assert!((r["exec_time_s"].as_f64().unwrap() - 3.578e-3).abs() < 1e-6);

    let fitted = ok(&[
        "cost", "--labels", "7", "--numeric", "10", "--values", "2x44", "--freq", "170", "--samples", "581012",
        "--fit-cold-start", "3.98",
    ]);
    assert!(fitted.contains("exec time   3.980000 ms"), "{fitted}");

    let bad = qhtree(&["cost", "--labels", "2", "--numeric", "1", "--categorical", "2"]);
    assert!(!bad.status.success());
}

#[test]
fn power_flow_emits_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("a,b,c,power_w\n");
    for i in 0..300 {
        let blob = i % 3;
        let power = [1.0, 5.0, 9.0][blob] + ((i * 37 % 11) as f64 - 5.0) * 0.01;
        csv.push_str(&format!("{},{},{},{power}\n", (i * 7 % 13) as f64 / 13.0, blob, (i * 5 % 17) as f64 / 17.0));
    }
    std::fs::write(p(d, "t.csv"), csv).unwrap();
    ok(&[
        "power-flow", "--traces", &p(d, "t.csv"), "--k-range", "2:5", "--n-max", "2", "--seed", "1", "--out",
        &p(d, "model.json"), "--data-out", &p(d, "train.csv"), "--schema-out", &p(d, "train.json"),
    ]);
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p(d, "model.json")).unwrap()).unwrap();
    assert_eq!(cfg["k"], 3);
    assert_eq!(cfg["signals"][0], "b");
    assert_eq!(cfg["signals"].as_array().unwrap().len(), 2);
    assert_eq!(cfg["run_config"]["hyper_params"]["max_depth"], 7);
    assert_eq!(cfg["run_config"]["hyper_params"]["elements"], 64);

    // the emitted stream trains directly
    let out = ok(&["train", "--schema", &p(d, "train.json"), "--data", &p(d, "train.csv"), "--header"]);
    assert!(out.starts_with("accuracy"));
}
