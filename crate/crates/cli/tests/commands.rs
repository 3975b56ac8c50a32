//! End-to-end runs of the `graphdiff` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use graphdiff_cli::{EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};

const SMALL_CONFIG: &str = r#"{
  "seed": 5,
  "dataset": {"generator": {"kind": "erdos_renyi", "n": 6, "p": 0.4}, "count": 16},
  "kernel": {"p_grid": [0.3, 0.5], "steps": 20},
  "model": {"hidden_sizes": [16], "time_embed_dim": 4},
  "train": {"epochs": 2, "batch_size": 4, "early_probe_epochs": 1},
  "eval": {"n_generated": 4},
  "seeds": [0]
}"#;

fn graphdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphdiff")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    fs::write(&path, SMALL_CONFIG).unwrap();
    path.to_str().unwrap().to_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn sweep_writes_csv_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out_dir = dir.path().join("results");
    let out = graphdiff(&["sweep", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));

    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,seed,mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit,early_loss,wall_time_s,error"));
    let seeds: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(seeds, ["0", "0", "mean", "mean"]);

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], 5);
    assert_eq!(meta["config"]["kernel"]["steps"], 20);
    assert!(meta["version"].is_string());
    assert!(meta["dataset"]["empirical_edge_prob"].is_number());
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out_dir = dir.path().join("results");
    let out_dir = out_dir.to_str().unwrap();
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(code(&graphdiff(&["sweep", "--config", &config, "--out", out_dir])), EXIT_OK);
        runs.push(fs::read(Path::new(out_dir).join("sweep.csv")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let run = |seed: &str, name: &str| {
        let out_dir = dir.path().join(name);
        let out = graphdiff(&["gen-data", "--config", &config, "--seed", seed, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
        fs::read(out_dir.join("dataset.jsonl")).unwrap()
    };
    // The dataset seed is derived from the global seed when the config leaves it unset.
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "a"), run("6", "c"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = graphdiff(&["frobnicate"]);
    assert_eq!(code(&out), EXIT_CONFIG);
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, SMALL_CONFIG.replace("[0.3, 0.5]", "[0.3, 1.2]")).unwrap();
    let out = graphdiff(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_CONFIG);
    assert!(stderr(&out).contains("p_grid"), "{}", stderr(&out));
}

#[test]
fn curves_writes_one_csv_for_three_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = graphdiff(&["curves", "--p", "0,0.5,0.8", "--out", out_dir]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("schedule_id,t,beta0,beta1,q_from0,q_from1"));
    // Default T = 100 gives 101 rows per schedule.
    assert_eq!(lines.count(), 3 * 101);
    let legend = fs::read_to_string(dir.path().join("curves_schedules.csv")).unwrap();
    assert_eq!(legend, "schedule_id,p\n0,0\n1,0.5\n2,0.8\n");
}

#[test]
fn gen_train_sample_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out_dir = dir.path().to_str().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();

    let out = graphdiff(&["gen-data", "--config", &config, "--out", out_dir]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    for name in ["dataset.jsonl", "train.jsonl", "reference.jsonl"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }

    let out = graphdiff(&["train", "--config", &config, "--p", "0.4", "--data", &path("train.jsonl"), "--out", out_dir]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let history = fs::read_to_string(dir.path().join("loss_history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3, "{history}");

    let out = graphdiff(&[
        "sample", "--config", &config, "--checkpoint", &path("checkpoint.json"), "--p", "0.4", "--count", "5", "--out",
        out_dir,
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    assert_eq!(fs::read_to_string(dir.path().join("generated.jsonl")).unwrap().lines().count(), 5);

    let out = graphdiff(&[
        "eval", "--config", &config, "--generated", &path("generated.jsonl"), "--reference", &path("reference.jsonl"),
        "--out", out_dir,
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let eval = fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert_eq!(eval.lines().next(), Some("mmd_degree,mmd_clustering,mmd_spectrum,mmd_orbit"));
    assert!(eval.lines().nth(1).unwrap().split(',').all(|v| v.parse::<f64>().unwrap().is_finite()));
}

#[test]
fn corrupt_checkpoint_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("checkpoint.json");
    fs::write(&ckpt, "{ not json").unwrap();
    let out = graphdiff(&["sample", "--checkpoint", ckpt.to_str().unwrap(), "--p", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_RUNTIME, "{}", stderr(&out));
}
