use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use log::{info, warn};
use serde::Serialize;
use siscm_core::data::{generate_synthetic, load_dataset, save_dataset, PanelDataset};
use siscm_core::evaluation::{
    evaluate, write_report, GnbCnbPredictor, GnbPredictor, SecondOpinionPredictor, SiScmPredictor, CROSS_GROUP,
    SAME_GROUP,
};
use siscm_core::models::{
    load_models, save_models, train_cnb_models, train_gnb_models, CnbModel, ExpertModel, ModelMap,
};
use siscm_core::partitioning::{learn_partition, write_violations_csv, PartitionConfig};
use siscm_core::rng::{derive_seed, substream};
use siscm_core::scm::{counterfactual_distribution, CounterfactualQuery};
use siscm_core::{ExpertId, Label, Partition};

use crate::args::{EvalArgs, InferArgs, PartitionArgs, PredictorArg, TrainArgs};
use crate::config::RunConfig;
use crate::UsageError;

fn require_file(path: &Path, what: &str) -> Result<(), UsageError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(UsageError(format!("{what} `{}` does not exist", path.display())))
    }
}

pub(crate) fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_partition(path: &Path) -> anyhow::Result<Partition> {
    require_file(path, "partition")?;
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("partition {}: {e}", path.display())).into())
}

fn read_dataset(path: &Path) -> anyhow::Result<PanelDataset> {
    require_file(path, "dataset")?;
    Ok(load_dataset(path)?)
}

fn read_models(path: &Path) -> anyhow::Result<ModelMap<ExpertModel>> {
    require_file(path, "model bundle")?;
    Ok(load_models(path)?)
}

pub fn synth(cfg: &RunConfig) -> anyhow::Result<()> {
    let panel = generate_synthetic(&cfg.synth)?;
    let dir = &cfg.out_dir;
    save_dataset(&panel.train, &dir.join("train.jsonl"))?;
    save_dataset(&panel.test, &dir.join("test.jsonl"))?;
    write_json(&panel.truth, &dir.join("truth.json"))?;
    let models: ModelMap<ExpertModel> =
        panel.models.into_iter().map(|(e, m)| (e, ExpertModel::Logit(m))).collect();
    save_models(&models, &dir.join("models.json"))?;
    info!(
        "wrote {} train and {} test samples for {} experts to {}",
        panel.train.len(),
        panel.test.len(),
        models.len(),
        dir.display()
    );
    Ok(())
}

pub fn train(cfg: &RunConfig, args: &TrainArgs) -> anyhow::Result<()> {
    let ds = read_dataset(&args.data)?;
    let gnb = train_gnb_models(&ds, cfg.smoothing)?;
    let models: ModelMap<ExpertModel> = gnb.into_iter().map(|(e, m)| (e, ExpertModel::Gnb(m))).collect();
    save_models(&models, &cfg.out_dir.join("models.json"))?;
    let cnb = train_cnb_models(&ds, cfg.alpha)?;
    save_models(&cnb, &cfg.out_dir.join("cnb.json"))?;
    info!("trained GNB and CNB models for {} experts", models.len());
    Ok(())
}

#[derive(Serialize)]
struct GraphStats {
    vertices: usize,
    edges: usize,
    co_observed_pairs: usize,
    violations: usize,
    violating_pairs: usize,
    groups: usize,
    singletons: usize,
    objective: f64,
}

pub fn partition(cfg: &RunConfig, args: &PartitionArgs) -> anyhow::Result<()> {
    let ds = read_dataset(&args.data)?;
    let models = read_models(&args.models)?;
    let pcfg = PartitionConfig {
        slack: cfg.slack,
        weight_samples: cfg.weight_samples,
        loss: cfg.loss,
        restarts: cfg.restarts,
        seed: cfg.seed,
    };
    let out = learn_partition(&ds, &models, &pcfg)?;
    if out.graph.num_edges() == 0 {
        warn!("no co-observed pair is free of violations; every expert is its own group");
    }
    let dir = &cfg.out_dir;
    write_json(&out.partition, &dir.join("partition.json"))?;
    write_violations_csv(&out.scan.violations, &dir.join("violations.csv"))?;
    out.graph.save(&dir.join("graph.json"))?;
    let stats = GraphStats {
        vertices: out.graph.num_vertices(),
        edges: out.graph.num_edges(),
        co_observed_pairs: out.scan.co_observations.len(),
        violations: out.scan.violations.len(),
        violating_pairs: out.scan.violating_pairs().len(),
        groups: out.partition.num_groups(),
        singletons: out.partition.groups().iter().filter(|g| g.len() == 1).count(),
        objective: out.objective,
    };
    write_json(&stats, &dir.join("graph_stats.json"))?;
    info!(
        "{} violations, {} edges, {} groups ({} singletons), objective {}",
        stats.violations, stats.edges, stats.groups, stats.singletons, stats.objective
    );
    Ok(())
}

#[derive(Serialize)]
struct InferAnswer {
    target: ExpertId,
    same_group: bool,
    probs: Vec<f64>,
    num_samples: usize,
    exact: bool,
    argmax: Label,
}

pub fn infer(cfg: &RunConfig, args: &InferArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let models = read_models(&args.models)?;
    let partition = read_partition(&args.partition)?;
    let source = ExpertId::from(args.expert.as_str());
    if !models.contains_key(&source) {
        return Err(siscm_core::Error::MissingExpert(source.to_string()).into());
    }
    let features = match (&args.features, &args.data, &args.sample) {
        (Some(x), _, _) => x.clone(),
        (None, Some(path), Some(id)) => {
            let ds = read_dataset(path)?;
            ds.sample(id).ok_or_else(|| UsageError(format!("sample `{id}` not found")))?.features.clone()
        }
        _ => return Err(UsageError("provide --features or --data with --sample".into()).into()),
    };
    let targets: Vec<ExpertId> = if args.target == "all" {
        models.keys().filter(|e| **e != source).cloned().collect()
    } else {
        let t = ExpertId::from(args.target.as_str());
        if !models.contains_key(&t) {
            return Err(siscm_core::Error::MissingExpert(t.to_string()).into());
        }
        vec![t]
    };
    let mut answers = Vec::new();
    for t in targets {
        let query = CounterfactualQuery {
            features: features.clone(),
            observed_expert: source.clone(),
            observed_label: Label(args.label),
            target_expert: t.clone(),
        };
        let mut rng = substream(cfg.seed, "infer", &format!("{}/{}", source, t));
        let est = counterfactual_distribution(&query, &partition, &models, cfg.samples, &mut rng)?;
        answers.push(InferAnswer {
            same_group: partition.same_group(&source, &t)?,
            argmax: est.argmax(),
            target: t,
            probs: est.probs,
            num_samples: est.num_samples,
            exact: est.exact,
        });
    }
    serde_json::to_writer_pretty(&mut *stdout, &answers)?;
    stdout.write_all(b"\n")?;
    Ok(())
}

pub fn eval(cfg: &RunConfig, args: &EvalArgs) -> anyhow::Result<()> {
    let test = read_dataset(&args.data)?;
    let models = read_models(&args.models)?;
    let partition = read_partition(&args.partition)?;
    let cnb: Option<ModelMap<CnbModel>> = match &args.cnb {
        Some(p) => {
            require_file(p, "CNB bundle")?;
            Some(load_models(p)?)
        }
        None => None,
    };
    let mut predictors = args.predictor.clone();
    predictors.sort();
    predictors.dedup();
    for which in predictors {
        let siscm;
        let gnb;
        let gnb_cnb;
        let predictor: &dyn SecondOpinionPredictor = match which {
            PredictorArg::Siscm => {
                siscm = SiScmPredictor {
                    models: &models,
                    partition: &partition,
                    samples: cfg.samples,
                    seed: derive_seed(cfg.seed, "eval", "siscm"),
                };
                &siscm
            }
            PredictorArg::Gnb => {
                gnb = GnbPredictor { models: &models };
                &gnb
            }
            PredictorArg::GnbCnb => {
                let cnb = cnb.as_ref().ok_or_else(|| UsageError("gnb_cnb needs --cnb".into()))?;
                gnb_cnb = GnbCnbPredictor { models: &models, cnb };
                &gnb_cnb
            }
        };
        let report = evaluate(&test, predictor, &partition)?;
        let dir = cfg.out_dir.join(which.name());
        std::fs::create_dir_all(&dir)?;
        write_report(&report, &dir, "")?;
        let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |a| format!("{:.1}%", 100.0 * a));
        info!(
            "{}: overall {} / same group {} / cross group {} over {} predictions",
            which.name(),
            pct(Some(report.overall_accuracy)),
            pct(report.scenario_accuracy(SAME_GROUP)),
            pct(report.scenario_accuracy(CROSS_GROUP)),
            report.n_predictions
        );
    }
    Ok(())
}
