use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_lingkod");

#[test]
fn metrics_bleu_reads_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    std::fs::write(
        &pairs,
        concat!(
            "{\"candidate\":\"A beautiful house this is\",\"reference\":\"This is a beautiful house\"}\n",
            "{\"candidate\":\"the cat sat\",\"reference\":\"the cat sat\"}\n",
        ),
    )
    .unwrap();
    let out = Command::new(BIN).args(["metrics", "bleu", "--pairs"]).arg(&pairs).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!((lines[0]["bleu"].as_f64().unwrap() - 0.6043).abs() < 1e-4);
    assert_eq!(lines[1]["bleu"], 1.0);
    assert!(lines[2]["corpus_bleu"].is_number());
}

#[test]
fn seed_and_export_need_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    let registry = dir.path().join("registry.tsv");
    std::fs::write(&registry, "ceb\tCebuano\tPH\nen\tEnglish\tGB,US\n").unwrap();
    let data = dir.path().join("data");

    let out = Command::new(BIN).env_remove("DATA_DIR").args(["seed", "--registry"]).arg(&registry).output().unwrap();
    assert!(!out.status.success());

    let out = Command::new(BIN).env("DATA_DIR", &data).args(["seed", "--registry"]).arg(&registry).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let state: Value = serde_json::from_str(&std::fs::read_to_string(data.join("state.json")).unwrap()).unwrap();
    assert!(state.to_string().contains("Cebuano"));
    assert!(!state.to_string().contains("Ilocano"));

    let out = Command::new(BIN)
        .env("DATA_DIR", &data)
        .args(["export", "--task", "t-000001", "--out"])
        .arg(dir.path().join("x.jsonl"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn bad_registry_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let registry = dir.path().join("registry.tsv");
    std::fs::write(&registry, "ceb\tCebuano\n").unwrap();
    let out = Command::new(BIN)
        .env("DATA_DIR", dir.path().join("data"))
        .args(["seed", "--registry"])
        .arg(&registry)
        .output()
        .unwrap();
    assert!(!out.status.success());
}
