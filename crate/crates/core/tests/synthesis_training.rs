mod common;

use common::{check_synthesis_batches, random_graph, small_sbm};
use graphsha::data::make_long_tailed_split;
use graphsha::diffusion::compute_diffusion;
use graphsha::nn::{train, train_with_diffusion};
use graphsha::synthesis::{mix_features, SourceSignals, Synthesizer};
use graphsha::{
    DeltaDistribution, DiffusionConfig, HardnessConfig, ImbalancedSplit, MixupConfig, Mode, QuotaMode, TrainConfig,
};
use ndarray::Array1;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn hundred_batches_respect_structure_labels_and_quotas() {
    let edges = check_synthesis_batches(100).unwrap();
    assert!(edges > 100);
}

#[test]
fn delta_one_copies_the_anchor() {
    let g = small_sbm(0);
    let split = make_long_tailed_split(&g, 10.0, 20, 5, 0).unwrap();
    let dm = compute_diffusion(&g, &DiffusionConfig { top_k: 16, ..DiffusionConfig::default() }).unwrap();
    let synth = Synthesizer::new(&g, &split, &dm, QuotaMode::Mean);
    let mcfg = MixupConfig { delta: DeltaDistribution::Constant(1.0), ..MixupConfig::default() };
    let batch = synth
        .synthesize(SourceSignals::Uniform, &HardnessConfig::default(), &mcfg, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap();
    assert!(!batch.is_empty());
    for (s, p) in batch.provenance.iter().enumerate() {
        assert_eq!(batch.features.row(s), g.features().row(p.anchor));
    }
}

proptest! {
    #[test]
    fn mixup_is_a_convex_combination(
        a in proptest::collection::vec(-10.0f64..10.0, 1..8),
        seed in 0u64..1000,
        delta in 0.0f64..=1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<f64> = a.iter().map(|_| rng.random_range(-10.0..10.0)).collect();
        let mixed = mix_features(Array1::from(a.clone()).view(), Array1::from(b.clone()).view(), delta).unwrap();
        for ((m, x), y) in mixed.iter().zip(&a).zip(&b) {
            prop_assert!(*m >= x.min(*y) - 1e-12 && *m <= x.max(*y) + 1e-12);
            prop_assert!((m - (delta * x + (1.0 - delta) * y)).abs() < 1e-12);
        }
    }
}

#[test]
fn mixup_rejects_delta_outside_unit_interval() {
    let x = Array1::from(vec![1.0, 2.0]);
    assert!(mix_features(x.view(), x.view(), 1.5).is_err());
    assert!(mix_features(x.view(), x.view(), -0.1).is_err());
}

fn quick(mode: Mode, seed: u64) -> TrainConfig {
    TrainConfig {
        mode,
        seed,
        max_epochs: 60,
        patience: 60,
        hidden_dim: 16,
        diffusion: DiffusionConfig { top_k: 16, ..DiffusionConfig::default() },
        ..TrainConfig::default()
    }
}

#[test]
fn vanilla_fits_the_training_set() {
    let g = random_graph(60, 0.08, 12, 3, 7);
    let train_nodes: Vec<usize> = (0..30).collect();
    let split = ImbalancedSplit::new(train_nodes.clone(), vec![], (30..60).collect(), g.labels(), 3).unwrap();
    let cfg = TrainConfig { max_epochs: 200, patience: 200, ..TrainConfig::default() };
    let out = train(&g, &split, &cfg).unwrap();
    let correct = train_nodes.iter().filter(|&&i| out.predictions[i] == g.label(i)).count();
    assert!(correct as f64 / 30.0 >= 0.99, "{correct}/30");
}

#[test]
fn training_is_deterministic_per_seed() {
    let g = small_sbm(1);
    let split = make_long_tailed_split(&g, 10.0, 20, 5, 1).unwrap();
    for mode in [Mode::Vanilla, Mode::Upsample, Mode::Reweight, Mode::GraphSha] {
        let a = train(&g, &split, &quick(mode, 3)).unwrap();
        let b = train(&g, &split, &quick(mode, 3)).unwrap();
        assert_eq!(a.trace, b.trace, "{mode:?}");
        assert_eq!(a.predictions, b.predictions);
        assert_eq!(a.params, b.params);
    }
}

#[test]
fn graphsha_without_quota_matches_vanilla() {
    // Equal training counts leave nothing to synthesize.
    let g = small_sbm(2);
    let split = make_long_tailed_split(&g, 1.0, 10, 5, 2).unwrap();
    assert!(split.class_counts_train().iter().all(|&c| c == 10));
    let dm = compute_diffusion(&g, &DiffusionConfig { top_k: 16, ..DiffusionConfig::default() }).unwrap();
    let v = train(&g, &split, &quick(Mode::Vanilla, 5)).unwrap();
    let s = train_with_diffusion(&g, &split, &quick(Mode::GraphSha, 5), Some(&dm)).unwrap();
    assert_eq!(v.trace, s.trace);
    assert_eq!(v.predictions, s.predictions);
}

#[test]
fn graphsha_leaves_the_original_graph_untouched() {
    let g = small_sbm(3);
    let before = g.clone();
    let split = make_long_tailed_split(&g, 10.0, 20, 5, 3).unwrap();
    let out = train(&g, &split, &quick(Mode::GraphSha, 0)).unwrap();
    assert_eq!(g.content_hash(), before.content_hash());
    assert_eq!(out.predictions.len(), g.num_nodes());
    assert!(out.trace.iter().skip(1).all(|r| r.synthesized > 0));
}
