use siscm_core::data::{generate_synthetic, load_dataset, save_dataset, SyntheticConfig};
use siscm_core::evaluation::{adjusted_rand_index, edge_ratio, evaluate, GnbPredictor, SiScmPredictor, SAME_GROUP};
use siscm_core::models::train_gnb_models;
use siscm_core::partitioning::{learn_partition, PartitionConfig};
use siscm_core::Partition;

fn small_panel(seed: u64) -> siscm_core::data::SyntheticPanel {
    let config = SyntheticConfig {
        n_experts: 9,
        group_sizes: vec![2, 3, 4],
        n_train: 600,
        n_test: 150,
        sparsity: 0.5,
        seed,
        ..SyntheticConfig::default()
    };
    generate_synthetic(&config).unwrap()
}

#[test]
fn planted_partition_is_recovered_from_true_models() {
    let panel = small_panel(11);
    let config = PartitionConfig { weight_samples: 200, seed: 3, ..PartitionConfig::default() };
    let out = learn_partition(&panel.train, &panel.models, &config).unwrap();

    assert_eq!(adjusted_rand_index(&out.partition, &panel.truth).unwrap(), 1.0);
    assert!(edge_ratio(&out.graph, &panel.truth).unwrap().value > 0.9);
    for (a, b) in out.scan.violating_pairs() {
        assert!(!out.partition.same_group(&a, &b).unwrap());
    }
}

#[test]
fn shared_noise_beats_the_marginal_within_groups() {
    let panel = small_panel(12);
    let fitted = train_gnb_models(&panel.train, 1e-9).unwrap();
    let siscm = SiScmPredictor { models: &panel.models, partition: &panel.truth, samples: 300, seed: 1 };
    let with_groups = evaluate(&panel.test, &siscm, &panel.truth).unwrap();
    let marginal = evaluate(&panel.test, &GnbPredictor { models: &fitted }, &panel.truth).unwrap();

    let same = with_groups.scenario_accuracy(SAME_GROUP).unwrap();
    assert!(same > marginal.scenario_accuracy(SAME_GROUP).unwrap() + 0.05, "same-group accuracy {same}");

    // singletons turn every pair into a cross-group query
    let singletons = Partition::singletons(panel.truth.experts());
    let solo = SiScmPredictor { models: &panel.models, partition: &singletons, samples: 300, seed: 1 };
    assert!(evaluate(&panel.test, &solo, &singletons).unwrap().scenario_accuracy(SAME_GROUP).is_none());
}

#[test]
fn datasets_survive_a_disk_round_trip() {
    let panel = small_panel(13);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.jsonl");
    save_dataset(&panel.train, &path).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), panel.train);
}
