use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use serde_json::Value;
use siscm_cli::{run, Cli};
use siscm_core::data::{save_dataset, PanelDataset, Sample};
use siscm_core::models::{load_models, save_models, ConditionalModel, ExpertModel, LogitModel, ModelMap};
use siscm_core::{ExpertId, Label, Partition};

fn siscm(args: &[&str]) -> anyhow::Result<Vec<u8>> {
    let cli = Cli::try_parse_from(std::iter::once("siscm").chain(args.iter().copied()))?;
    let mut out = Vec::new();
    run(&cli, &mut out)?;
    Ok(out)
}

fn exit_status(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_siscm")).args(args).output().unwrap().status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_synth(out: &Path, seed: &str) {
    siscm(&[
        "--seed", seed, "--out-dir", p(out), "synth", "--group-sizes", "2,3", "--n-train", "200", "--n-test", "40",
        "--sparsity", "0.4",
    ])
    .unwrap();
}

/// Three experts on one feature: `a` and `b` share a model and always agree,
/// `c` has its own model.
fn oracle_fixture(dir: &Path) {
    let experts: Vec<ExpertId> = ["a", "b", "c"].into_iter().map(ExpertId::from).collect();
    let samples: Vec<Sample> = (0..30)
        .map(|i| {
            let label = Label(i % 3);
            let mut predictions = BTreeMap::new();
            predictions.insert(experts[0].clone(), label);
            predictions.insert(experts[1].clone(), label);
            if i % 2 == 0 {
                predictions.insert(experts[2].clone(), Label((i / 2) % 3));
            }
            Sample { id: format!("s{i:02}"), features: vec![label.0 as f64 - 1.0], predictions }
        })
        .collect();
    let ds = PanelDataset::new(3, 1, PanelDataset::default_label_names(3), experts.clone(), samples).unwrap();
    save_dataset(&ds, &dir.join("panel.jsonl")).unwrap();

    let shared = LogitModel::new(vec![vec![-2.0], vec![0.0], vec![2.0]]).unwrap();
    let other = LogitModel::new(vec![vec![0.5], vec![0.0], vec![-0.5]]).unwrap();
    let models: BTreeMap<ExpertId, ExpertModel> = [
        (experts[0].clone(), ExpertModel::Logit(shared.clone())),
        (experts[1].clone(), ExpertModel::Logit(shared)),
        (experts[2].clone(), ExpertModel::Logit(other)),
    ]
    .into();
    save_models(&models, &dir.join("models.json")).unwrap();
    let partition = Partition::new(vec![experts[..2].to_vec(), vec![experts[2].clone()]]).unwrap();
    std::fs::write(dir.join("partition.json"), serde_json::to_string(&partition).unwrap()).unwrap();
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path());
    assert_eq!(exit_status(&["--out-dir", out, "synth", "--group-sizes", "0,3"]), 2);
    assert_eq!(exit_status(&["--out-dir", out, "train", "--data", "/nonexistent/panel.jsonl"]), 2);
    assert_eq!(exit_status(&["--out-dir", out, "bench", "--s", "1.5"]), 2);
    assert_eq!(exit_status(&["--bogus"]), 2);

    oracle_fixture(dir.path());
    let models = dir.path().join("models.json");
    let partition = dir.path().join("partition.json");
    let infer = ["infer", "--models", p(&models), "--partition", p(&partition), "--label", "0", "--features", "0.5"];
    let mut unknown = infer.to_vec();
    unknown.extend(["--expert", "zz"]);
    assert_eq!(exit_status(&unknown), 2);
    let mut ok = infer.to_vec();
    ok.extend(["--expert", "a"]);
    assert_eq!(exit_status(&ok), 0);
}

#[test]
fn synth_writes_panel_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_synth(a.path(), "3");
    small_synth(b.path(), "3");
    for f in ["train.jsonl", "test.jsonl", "truth.json", "models.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert!(!x.is_empty(), "{f} is empty");
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f} differs between runs");
    }
    let truth: Partition = serde_json::from_str(&std::fs::read_to_string(a.path().join("truth.json")).unwrap()).unwrap();
    let mut sizes: Vec<usize> = truth.groups().iter().map(Vec::len).collect();
    sizes.sort();
    assert_eq!(sizes, vec![2, 3]);

    let c = tempfile::tempdir().unwrap();
    small_synth(c.path(), "4");
    assert_ne!(std::fs::read(a.path().join("train.jsonl")).unwrap(), std::fs::read(c.path().join("train.jsonl")).unwrap());
}

#[test]
fn train_is_deterministic() {
    let data = tempfile::tempdir().unwrap();
    small_synth(data.path(), "5");
    let train = data.path().join("train.jsonl");
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let out = tempfile::tempdir().unwrap();
            siscm(&["--out-dir", p(out.path()), "train", "--data", p(&train)]).unwrap();
            let models: ModelMap<ExpertModel> = load_models(&out.path().join("models.json")).unwrap();
            (std::fs::read(out.path().join("models.json")).unwrap(), std::fs::read(out.path().join("cnb.json")).unwrap(), models)
        })
        .collect();
    assert_eq!(runs[0].0, runs[1].0);
    assert_eq!(runs[0].1, runs[1].1);
    let fitted = &runs[0].2;
    assert_eq!(fitted.len(), 5);
    assert!(fitted.values().all(|m| matches!(m, ExpertModel::Gnb(_))));
    assert!(fitted.values().all(|m| m.num_labels() == 5));
}

#[test]
fn partition_without_co_observations_is_all_singletons() {
    let dir = tempfile::tempdir().unwrap();
    oracle_fixture(dir.path());
    let experts: Vec<ExpertId> = ["a", "b", "c"].into_iter().map(ExpertId::from).collect();
    let samples = (0..9)
        .map(|i| Sample {
            id: format!("s{i}"),
            features: vec![0.0],
            predictions: [(experts[i % 3].clone(), Label(i % 2))].into(),
        })
        .collect();
    let ds = PanelDataset::new(3, 1, PanelDataset::default_label_names(3), experts, samples).unwrap();
    let data = dir.path().join("solo.jsonl");
    save_dataset(&ds, &data).unwrap();
    let out = dir.path().join("out");
    siscm(&["--out-dir", p(&out), "partition", "--data", p(&data), "--models", p(&dir.path().join("models.json"))]).unwrap();

    let partition: Partition = serde_json::from_str(&std::fs::read_to_string(out.join("partition.json")).unwrap()).unwrap();
    assert_eq!(partition.num_groups(), 3);
    let violations = std::fs::read_to_string(out.join("violations.csv")).unwrap();
    assert_eq!(violations.lines().count(), 1);
    let stats: Value = serde_json::from_str(&std::fs::read_to_string(out.join("graph_stats.json")).unwrap()).unwrap();
    assert_eq!(stats["edges"], 0);
}

#[test]
fn infer_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    oracle_fixture(dir.path());
    let stdout = siscm(&[
        "-T",
        "2000",
        "infer",
        "--models",
        p(&dir.path().join("models.json")),
        "--partition",
        p(&dir.path().join("partition.json")),
        "--expert",
        "a",
        "--label",
        "2",
        "--features",
        "0.5",
    ])
    .unwrap();
    let answers: Value = serde_json::from_slice(&stdout).unwrap();
    let answers = answers.as_array().unwrap();
    assert_eq!(answers.len(), 2);

    // b shares a's model and noise: a point mass on the observed label
    assert_eq!(answers[0]["target"], "b");
    assert_eq!(answers[0]["same_group"], true);
    assert_eq!(answers[0]["exact"], false);
    assert_eq!(answers[0]["num_samples"], 2000);
    let probs: Vec<f64> = serde_json::from_value(answers[0]["probs"].clone()).unwrap();
    assert_eq!(probs, vec![0.0, 0.0, 1.0]);

    // c is in another group: its marginal softmax(0.25, 0, -0.25)
    assert_eq!(answers[1]["target"], "c");
    assert_eq!(answers[1]["exact"], true);
    let probs: Vec<f64> = serde_json::from_value(answers[1]["probs"].clone()).unwrap();
    let z: f64 = [0.25f64, 0.0, -0.25].iter().map(|v| v.exp()).sum();
    for (got, logit) in probs.iter().zip([0.25f64, 0.0, -0.25]) {
        assert!((got - logit.exp() / z).abs() < 1e-12);
    }
    assert_eq!(answers[1]["argmax"], 0);
}

#[test]
fn eval_writes_reports_for_each_predictor() {
    let dir = tempfile::tempdir().unwrap();
    oracle_fixture(dir.path());
    let panel = dir.path().join("panel.jsonl");
    let out = dir.path().join("out");
    siscm(&["--out-dir", p(&out), "train", "--data", p(&panel)]).unwrap();
    siscm(&[
        "--out-dir",
        p(&out),
        "-T",
        "200",
        "eval",
        "--data",
        p(&panel),
        "--models",
        p(&dir.path().join("models.json")),
        "--partition",
        p(&dir.path().join("partition.json")),
        "--cnb",
        p(&out.join("cnb.json")),
        "--predictor",
        "siscm,gnb,gnb_cnb",
    ])
    .unwrap();
    for name in ["siscm", "gnb", "gnb_cnb"] {
        for f in ["report.json", "confusion_matrix.csv", "per_expert_accuracy.csv"] {
            assert!(out.join(name).join(f).is_file(), "{name}/{f} missing");
        }
    }
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("siscm/report.json")).unwrap()).unwrap();
    // 30 samples with an a/b pair (2 ordered pairs each), 15 with c (4 more)
    assert_eq!(report["n_predictions"], 120);
    assert_eq!(report["scenarios"]["same_group"]["n"], 60);
    assert_eq!(report["scenarios"]["same_group"]["accuracy"], 1.0);

    // gnb_cnb without a CNB bundle is a usage error
    let err = siscm(&[
        "--out-dir",
        p(&out),
        "eval",
        "--data",
        p(&panel),
        "--models",
        p(&dir.path().join("models.json")),
        "--partition",
        p(&dir.path().join("partition.json")),
        "--predictor",
        "gnb_cnb",
    ])
    .unwrap_err();
    assert_eq!(siscm_cli::exit_code(&err), 2);
}

#[test]
fn bench_writes_one_row_per_cell_and_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"synth": {"group_sizes": [2, 3], "n_experts": 5, "n_test": 30}}"#).unwrap();
    siscm(&[
        "--config",
        p(&config),
        "--out-dir",
        p(dir.path()),
        "-T",
        "50",
        "--t-weights",
        "50",
        "bench",
        "--m",
        "60,120",
        "--s",
        "0.3,0.5,0.7",
        "--replicates",
        "2",
    ])
    .unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("grid.csv")).unwrap();
    let rows: Vec<siscm_cli::bench::BenchRow> = reader.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 3 * 2);
    assert_eq!((rows[0].m, rows[0].s, rows[0].replicate), (60, 0.3, 0));
    assert_eq!((rows[11].m, rows[11].s, rows[11].replicate), (120, 0.7, 1));
    assert!(rows.iter().all(|r| (-1.0..=1.0).contains(&r.ari) && (0.0..=1.0).contains(&r.edge_ratio)));
}
