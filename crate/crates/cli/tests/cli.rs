use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnoise")).args(args).env_remove("QNOISE_WORKERS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn template_train_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnoise(&["template", "--kind", "run"]);
    assert!(out.status.success());
    let text = stdout(&out).replace("epochs = 3000", "epochs = 20");
    assert!(text.contains("epochs = 20\n"), "{text}");
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, text).unwrap();

    let run = dir.path().join("run");
    let out = qnoise(&["train", "--config", p(&cfg), "--out", p(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("final_kl "));
    let csv = fs::read_to_string(run.join("epochs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    for f in ["config.toml", "params.json", "summary.json"] {
        assert!(run.join(f).is_file(), "{f}");
    }
}

#[test]
fn sweep_aggregate_importance() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&qnoise(&["template", "--kind", "sweep"]));
    let text = text
        .replace("n_rep = 20", "n_rep = 2")
        .replace("epochs = 3000", "epochs = 8")
        .replace("lr_g = [0.001, 0.01, 0.1]", "lr_g = [0.01, 0.1]")
        .replace("lr_d = [0.001, 0.01, 0.1]", "lr_d = [0.01]")
        .replace("gamma = [0.99, 0.999, 1.0]", "gamma = [1.0]")
        .replace("p = [0.01, 0.05, 0.1]", "p = [0.05]");
    let cfg = dir.path().join("sweep.toml");
    fs::write(&cfg, &text).unwrap();

    let sweep = dir.path().join("sweep");
    let out = Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(["sweep", "--config", p(&cfg), "--out", p(&sweep)])
        .env("QNOISE_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).trim(), "4 runs, 0 not completed", "{text}");
    let manifest = fs::read_to_string(sweep.join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 5);

    let summary = dir.path().join("summary.json");
    let out = qnoise(&["aggregate", "--in", p(&sweep), "--out", p(&summary)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 1);

    let out = qnoise(&["importance", "--in", p(&summary)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
}

#[test]
fn bad_configs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let text = stdout(&qnoise(&["template"]));
    fs::write(&cfg, format!("learning_rate = 0.1\n{text}")).unwrap();
    let out = qnoise(&["train", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));

    let missing = qnoise(&["train", "--config", p(&dir.path().join("nope.toml")), "--out", p(dir.path())]);
    assert!(!missing.status.success());
    assert!(!qnoise(&["aggregate", "--in", p(dir.path()), "--out", p(&dir.path().join("s.json"))]).status.success());
}
