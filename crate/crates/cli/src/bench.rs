//! `alpool bench`: time one selection pass per strategy on a warm model.
//!
//! Mirrors the first acquisition of a run — initial draw, first training
//! round, then a timed selection from the remaining pool — and reports the
//! median over a few passes, plus the AG round-robin's relative overhead
//! against the mean of its constituent single metrics.

use std::collections::BTreeMap;

use alpool::harness::{derive_trial_seeds, time_selection, HarnessConfig, PoolState, Strategy};
use alpool::model::{train, LabeledSample, ScorerParams, TrainConfig};
use alpool::{seed, Error, Result, SampleId};

use crate::config::ExperimentConfig;

/// Odd, so the median is an actual measurement.
const PASSES: usize = 5;

pub fn cmd_bench(config: &ExperimentConfig) -> Result<()> {
    let dataset = config.load_dataset()?;
    let schedule = config.schedule()?;
    let harness = config.harness(dataset.height, dataset.width)?;
    harness.validate(&dataset)?;

    let trial_seed = schedule
        .trial_seeds
        .first()
        .copied()
        .unwrap_or_else(|| derive_trial_seeds(config.seed, 1)[0]);

    // Warm baseline, exactly as a run's first iteration builds it.
    let by_id: BTreeMap<SampleId, &LabeledSample> = dataset
        .train
        .iter()
        .map(|s| (s.features.sample_id, s))
        .collect();
    let mut pool = PoolState::new(dataset.train_ids(), dataset.eval_ids())?;
    let initial = schedule.initial_size.min(dataset.train.len());
    pool.seed_initial(initial, seed::derive(trial_seed, seed::streams::INITIAL_POOL))?;
    let labeled: Vec<&LabeledSample> = pool.labeled().iter().map(|id| by_id[id]).collect();
    let init = ScorerParams::init(
        dataset.classes,
        dataset.feature_dim,
        harness.pool,
        seed::derive(trial_seed, seed::streams::INIT),
    )?;
    let train_cfg = TrainConfig {
        epochs: schedule.epochs[0],
        learning_rate: harness.learning_rate,
        batch_size: harness.batch_size,
    };
    let params = train(
        &init,
        &labeled,
        &train_cfg,
        seed::derive2(trial_seed, seed::streams::TRAIN, 0),
    )?;

    let pool_ids = pool.unlabeled_sorted();
    let pool_refs: Vec<&LabeledSample> = pool_ids.iter().map(|id| by_id[id]).collect();
    let request = schedule.additions.first().copied().unwrap_or(initial).max(1);
    let n = request.min(pool_refs.len());
    if n == 0 {
        return Err(Error::config(
            "initial_size leaves nothing to select; shrink it or grow the dataset",
        ));
    }

    println!(
        "selection timing: {} pool samples, {} selected, median of {PASSES} passes",
        pool_refs.len(),
        n
    );
    let random_seed = seed::derive2(trial_seed, seed::streams::RANDOM_SEL, 1);
    let mut single_times = Vec::new();
    for &metric in &harness.ag_metrics {
        let t = median_seconds(Strategy::Single(metric), &params, &pool_refs, n, &harness, random_seed)?;
        println!("  {:<8} {t:>10.6} s", metric.to_string());
        single_times.push(t);
    }
    let ag = median_seconds(Strategy::Ag, &params, &pool_refs, n, &harness, random_seed)?;
    println!("  {:<8} {ag:>10.6} s", "AG");
    let random = median_seconds(Strategy::Random, &params, &pool_refs, n, &harness, random_seed)?;
    println!("  {:<8} {random:>10.6} s", "R");

    let single_mean = single_times.iter().sum::<f64>() / single_times.len() as f64;
    let delta = 100.0 * (ag - single_mean) / single_mean;
    println!("single-metric mean: {single_mean:.6} s");
    println!("AG overhead vs single-metric mean: {delta:+.2}%");
    Ok(())
}

fn median_seconds(
    strategy: Strategy,
    params: &ScorerParams,
    pool: &[&LabeledSample],
    n: usize,
    config: &HarnessConfig,
    random_seed: u64,
) -> Result<f64> {
    let mut times = Vec::with_capacity(PASSES);
    for _ in 0..PASSES {
        let (_, seconds) = time_selection(strategy, params, pool, n, config, random_seed)?;
        times.push(seconds);
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}
