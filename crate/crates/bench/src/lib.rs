//! Shared fixtures for the criterion benchmarks.

use alpool::data::{generate_synthetic, Dataset, SynthParams};
use alpool::harness::HarnessConfig;
use alpool::model::{train, ScorerParams, TrainConfig};
use alpool::scoremap::PoolConfig;

/// Default-scale synthetic dataset (600 train / 200 eval, C=8, 8×8×16).
pub fn bench_dataset() -> Dataset {
    generate_synthetic(&SynthParams {
        seed: 2024,
        ..SynthParams::default()
    })
    .expect("valid default parameters")
}

/// Half-size variant for scaling comparisons.
pub fn bench_dataset_small() -> Dataset {
    generate_synthetic(&SynthParams {
        train_samples: 300,
        eval_samples: 100,
        seed: 2024,
        ..SynthParams::default()
    })
    .expect("valid parameters")
}

pub fn bench_config(dataset: &Dataset) -> HarnessConfig {
    HarnessConfig::new(PoolConfig::weldon(dataset.height, dataset.width))
}

/// A briefly trained scorer so metric values are non-degenerate.
pub fn warm_model(dataset: &Dataset, config: &HarnessConfig) -> ScorerParams {
    let init = ScorerParams::init(dataset.classes, dataset.feature_dim, config.pool, 7)
        .expect("valid shape");
    let refs: Vec<_> = dataset.train.iter().take(60).collect();
    train(
        &init,
        &refs,
        &TrainConfig {
            epochs: 5,
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
        },
        7,
    )
    .expect("training succeeds")
}
