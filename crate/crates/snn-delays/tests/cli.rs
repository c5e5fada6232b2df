//! End-to-end checks of the command-line binary: exit codes, the parameter
//! report, gradient check, and a generate/train/eval round trip.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_snn-delays"))
}

#[test]
fn params_prints_breakdown() {
    let out = bin()
        .args([
            "params", "--model", "adlif", "--h", "128", "--l", "2", "--cin", "140", "--cout",
            "20", "--nd", "10", "--train-asd",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("delay = 2560"), "{text}");
    assert!(text.contains("feedforward = 36864"), "{text}");
    assert!(text.contains("total = 41000"), "{text}");
}

#[test]
fn params_frozen_matches_quoted_total() {
    let out = bin()
        .args([
            "params", "--model", "adlif", "--h", "128", "--l", "2", "--cin", "140", "--cout",
            "20", "--nd", "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("delay = 0"), "{text}");
    assert!(text.contains("total = 38440"), "{text}");
}

#[test]
fn gradcheck_passes_and_reports() {
    let out = bin()
        .args(["gradcheck", "--h", "4", "--T", "10", "--nd", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("max relative error"), "{text}");
    assert!(text.contains("passed"), "{text}");
}

#[test]
fn missing_config_is_usage_error() {
    let out = bin()
        .args(["train", "--config", "definitely-missing.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "nonsense_key = 1\n").unwrap();
    let out = bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense_key"));
}

#[test]
fn gen_train_eval_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let runs = dir.path().join("runs");

    let out = bin()
        .args([
            "gen-synth",
            "--channels",
            "6",
            "--train-samples",
            "96",
            "--test-samples",
            "48",
            "--noise",
            "0.05",
        ])
        .arg("--out")
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(data.join("synth_train.snne").exists());
    assert!(data.join("synth_test.snne").exists());

    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "model = adlif\nh = 6\nl = 1\nc_in = 6\nc_out = 2\nnd = 4\nscheme = uniform\n\
             dropout = 0\nepochs = 2\nbatch_size = 16\naugment = false\n\
             window_us = 1\nbin_factor = 1\nt_max = 40\nexpect_split = none\n\
             train_file = synth_train.snne\ntest_file = synth_test.snne\n\
             data_dir = {}\nout_dir = {}\n",
            data.display(),
            runs.display()
        ),
    )
    .unwrap();

    let out = bin().args(["train", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("epoch,lr,train_loss,train_acc,test_acc,seconds"));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("0,") || l.starts_with("1,")).count(), 2);
    assert!(runs.join("train.csv").exists());
    assert!(runs.join("train.json").exists());

    let ckpt = find_checkpoint(&runs);
    let out = bin()
        .args(["eval", "--config"])
        .arg(&cfg)
        .arg("--checkpoint")
        .arg(&ckpt)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("test_acc"));
}

fn find_checkpoint(runs: &Path) -> std::path::PathBuf {
    std::fs::read_dir(runs)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .find(|p| p.extension().is_some_and(|x| x == "snnc"))
        .expect("checkpoint written")
}

#[test]
fn sweep_writes_one_row_per_cell_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let runs = dir.path().join("runs");
    bin()
        .args([
            "gen-synth",
            "--channels",
            "6",
            "--train-samples",
            "64",
            "--test-samples",
            "32",
            "--noise",
            "0.05",
        ])
        .arg("--out")
        .arg(&data)
        .output()
        .unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        format!(
            "model = lif\nh = 4\nl = 1\nc_in = 6\nc_out = 2\nepochs = 1\nbatch_size = 16\n\
             dropout = 0\naugment = false\nwindow_us = 1\nbin_factor = 1\nt_max = 40\n\
             expect_split = none\ntrain_file = synth_train.snne\ntest_file = synth_test.snne\n\
             data_dir = {}\nout_dir = {}\nseeds = 0,1\n\
             sweep_models = lif,adlif\nsweep_nd = 0,4\nsweep_schemes = uniform\nsweep_h = 4\n",
            data.display(),
            runs.display()
        ),
    )
    .unwrap();
    let out = bin().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(runs.join("sweep.csv")).unwrap();
    // Header + 4 cells x 2 seeds.
    assert_eq!(csv.lines().count(), 1 + 4 * 2, "{csv}");
    let json = std::fs::read_to_string(runs.join("sweep.json")).unwrap();
    assert!(json.contains("config_hash"));
}
