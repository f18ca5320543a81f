use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pqpe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqpe"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("PQPE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json_line(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("no number `{key}` in {v}"))
}

#[test]
fn dpss_for_delta_and_trivial_length() {
    let dir = TempDir::new().unwrap();
    let v = json_line(&pqpe(dir.path(), &["dpss", "--dim", "34", "--delta", "1e-2"]));
    assert!((num(&v, "eigenvalue") - 0.99).abs() < 1e-10);
    assert!(dir.path().join("dpss_34.csv").exists());
    assert!(dir.path().join("dpss_34.json").exists());

    let v = json_line(&pqpe(dir.path(), &["dpss", "-D", "1", "--d", "1.5707963267948966"]));
    assert!((num(&v, "eigenvalue") - 0.5).abs() < 1e-14);
}

#[test]
fn analyze_recovers_the_window_confidence() {
    let dir = TempDir::new().unwrap();
    json_line(&pqpe(dir.path(), &["dpss", "--dim", "64", "--delta", "1e-3"]));
    let csv = dir.path().join("dpss_64.csv");
    let csv = csv.to_str().unwrap();
    let v = json_line(&pqpe(
        dir.path(),
        &["analyze", "--confidence", "--state", csv, "--window", csv],
    ));
    let conf = num(&v["confidence"][0], "confidence");
    assert!((conf - 0.999).abs() < 1e-10, "{v}");
    assert!(num(&v["comparison"], "relative_increase").abs() < 1e-10);
    assert!(dir.path().join("analyze_dpss_64.json").exists());
}

#[test]
fn compression_infidelities() {
    let dir = TempDir::new().unwrap();
    let args = [
        "compress",
        "--dim",
        "256",
        "--delta",
        "1e-2",
        "--bandwidth",
        "reference",
    ];
    let v = json_line(&pqpe(dir.path(), &[&args[..], &["--chi", "4"]].concat()));
    assert!((num(&v, "infidelity") / 8.53e-8 - 1.0).abs() < 0.02, "{v}");
    let v = json_line(&pqpe(dir.path(), &[&args[..], &["--chi", "16"]].concat()));
    assert!(num(&v, "infidelity") <= 1e-12, "{v}");

    let state = dir.path().join("product.csv");
    let amps: Vec<String> = (0..16).map(|k| format!("{k},0.25")).collect();
    std::fs::write(&state, amps.join("\n") + "\n").unwrap();
    let v = json_line(&pqpe(
        dir.path(),
        &["compress", "--window", state.to_str().unwrap(), "--chi", "2"],
    ));
    assert!(num(&v, "infidelity") <= 1e-14, "{v}");
}

#[test]
fn compress_synth_simulate_pipeline() {
    let dir = TempDir::new().unwrap();
    json_line(&pqpe(
        dir.path(),
        &["compress", "--dim", "1024", "--delta", "1e-4", "--chi", "4"],
    ));
    let mps = dir.path().join("mps.json");
    let v = json_line(&pqpe(dir.path(), &["synth", "--mps", mps.to_str().unwrap()]));
    assert_eq!(v["n_qubits"], 10);
    assert!((num(&v, "t_cost_budget") - 1317.2).abs() < 1.0, "{v}");
    assert!(1.0 - num(&v, "state_fidelity") < 1e-10);
    for f in ["circuit.json", "circuit.qasm", "synth_report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let circuit = dir.path().join("circuit.json");
    let full = json_line(&pqpe(
        dir.path(),
        &[
            "simulate",
            "--circuit",
            circuit.to_str().unwrap(),
            "--phi",
            "0.7",
            "--d",
            "0.02",
        ],
    ));
    let exact = json_line(&pqpe(
        dir.path(),
        &[
            "simulate",
            "--mps",
            mps.to_str().unwrap(),
            "--phi",
            "0.7",
            "--d",
            "0.02",
            "--mode",
            "exact",
        ],
    ));
    assert_eq!(exact["peak_live_qubits"], 3);
    assert!((num(&full, "confidence") - num(&exact, "confidence")).abs() < 1e-9);
}

#[test]
fn reproduce_tables_pass_and_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for target in ["table1", "table_cost"] {
        for dir in [&a, &b] {
            let out = pqpe(dir.path(), &["reproduce", target]);
            assert!(
                out.status.success(),
                "{target}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        let name = format!("{target}.csv");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between runs");
        assert!(a.path().join(format!("{target}_comparison.json")).exists());
    }
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"dim": 34, "delta": 1e-2}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json_line(&pqpe(dir.path(), &["--config", cfg, "dpss"]));
    assert_eq!(v["dim"], 34);
    let v = json_line(&pqpe(dir.path(), &["--config", cfg, "dpss", "--dim", "40"]));
    assert_eq!(v["dim"], 40);
    assert!((num(&v, "eigenvalue") - 0.99).abs() < 1e-10);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dimension": 34}"#).unwrap();
    let out = pqpe(dir.path(), &["--config", bad.to_str().unwrap(), "dpss"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_are_single_lines_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = pqpe(dir.path(), &["dpss"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:"), "{err}");

    let out = pqpe(dir.path(), &["dpss", "--dim", "8", "--d", "1.0", "--delta", "1e-2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pqpe(dir.path(), &["dpss", "--dim", "8", "--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(1));

    let missing = dir.path().join("absent.json");
    let out = pqpe(dir.path(), &["synth", "--mps", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
