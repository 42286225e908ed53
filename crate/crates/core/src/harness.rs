//! The annotate–retrain loop: pool bookkeeping, per-iteration selection,
//! trial execution, and cross-trial aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{adversarial_select, metric_agnostic, vote_select, SelectionRequest};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{random_ranking, rank_by_values, score_pool, EntropyKind, MetricId, Ranking};
use crate::model::{
    evaluate_map, forward, train, LabeledSample, Prediction, ScorerParams, TrainConfig,
};
use crate::scoremap::PoolConfig;
use crate::seed::{self, streams};
use crate::SampleId;

/// Labeled/unlabeled bookkeeping for one trial.
///
/// Oracle labels stay in the dataset; selection code only ever sees
/// predictions (the adversarial baseline is handed label counts explicitly).
#[derive(Debug, Clone)]
pub struct PoolState {
    labeled: Vec<SampleId>,
    unlabeled: BTreeSet<SampleId>,
    eval: Vec<SampleId>,
    iteration: usize,
}

impl PoolState {
    pub fn new(
        train: impl IntoIterator<Item = SampleId>,
        eval: impl IntoIterator<Item = SampleId>,
    ) -> Result<Self> {
        let unlabeled: BTreeSet<SampleId> = train.into_iter().collect();
        let eval: Vec<SampleId> = eval.into_iter().collect();
        if let Some(id) = eval.iter().find(|id| unlabeled.contains(id)) {
            return Err(Error::config(format!(
                "sample {id} appears in both train and eval"
            )));
        }
        Ok(Self {
            labeled: Vec::new(),
            unlabeled,
            eval,
            iteration: 0,
        })
    }

    /// Uniform random draw into the labeled set, truncated to the pool size;
    /// returns the drawn ids in draw order.
    pub fn seed_initial(&mut self, count: usize, seed_value: u64) -> Result<Vec<SampleId>> {
        if !self.labeled.is_empty() {
            return Err(Error::usage("initial labeled set is already seeded"));
        }
        let mut ids: Vec<SampleId> = self.unlabeled.iter().copied().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
        ids.shuffle(&mut rng);
        ids.truncate(count);
        self.acquire(&ids)?;
        Ok(ids)
    }

    /// Moves ids from unlabeled to labeled; rejects foreign or repeated ids.
    pub fn acquire(&mut self, ids: &[SampleId]) -> Result<()> {
        for &id in ids {
            if !self.unlabeled.remove(&id) {
                return Err(Error::usage(format!(
                    "sample {id} is not in the unlabeled pool"
                )));
            }
            self.labeled.push(id);
        }
        Ok(())
    }

    pub fn advance(&mut self) {
        self.iteration += 1;
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Labeled ids in acquisition order.
    pub fn labeled(&self) -> &[SampleId] {
        &self.labeled
    }

    pub fn eval_ids(&self) -> &[SampleId] {
        &self.eval
    }

    pub fn unlabeled_sorted(&self) -> Vec<SampleId> {
        self.unlabeled.iter().copied().collect()
    }

    pub fn unlabeled_len(&self) -> usize {
        self.unlabeled.len()
    }
}

/// Iteration budgets and per-trial seeds for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub initial_size: usize,
    /// Samples acquired per iteration.
    pub additions: Vec<usize>,
    /// One epoch budget per training pass: `epochs[0]` for the baseline,
    /// `epochs[k]` after iteration `k`'s acquisition.
    pub epochs: Vec<usize>,
    pub trials: usize,
    pub trial_seeds: Vec<u64>,
}

impl Schedule {
    /// Builds a schedule whose trial seeds derive from one base seed.
    pub fn with_derived_seeds(
        initial_size: usize,
        additions: Vec<usize>,
        epochs: Vec<usize>,
        trials: usize,
        base_seed: u64,
    ) -> Self {
        Self {
            initial_size,
            additions,
            epochs,
            trials,
            trial_seeds: derive_trial_seeds(base_seed, trials),
        }
    }

    pub fn iterations(&self) -> usize {
        self.additions.len()
    }

    pub fn total_budget(&self) -> usize {
        self.initial_size + self.additions.iter().sum::<usize>()
    }

    /// Internal consistency, independent of any dataset.
    pub fn validate_shape(&self) -> Result<()> {
        if self.initial_size == 0 {
            return Err(Error::config("initial_size must be at least 1"));
        }
        if self.additions.iter().any(|&a| a == 0) {
            return Err(Error::config("iteration additions must be positive"));
        }
        if self.epochs.len() != self.additions.len() + 1 {
            return Err(Error::config(format!(
                "epochs list has {} entries for {} training passes",
                self.epochs.len(),
                self.additions.len() + 1
            )));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.trial_seeds.len() != self.trials {
            return Err(Error::config(format!(
                "{} trial seeds for {} trials",
                self.trial_seeds.len(),
                self.trials
            )));
        }
        Ok(())
    }

    /// Shape checks plus the budget fitting the train split.
    pub fn validate_budget(&self, train_size: usize) -> Result<()> {
        self.validate_shape()?;
        if self.total_budget() > train_size {
            return Err(Error::config(format!(
                "schedule needs {} samples but the train split has {train_size}",
                self.total_budget()
            )));
        }
        Ok(())
    }
}

pub fn derive_trial_seeds(base_seed: u64, trials: usize) -> Vec<u64> {
    (0..trials)
        .map(|t| seed::derive2(base_seed, streams::TRIAL, t as u64))
        .collect()
}

/// UNC, ENT, MM, SEPMAX, SEPMIN, SEPSUM — the default round-robin turn order.
pub const DEFAULT_AG_METRICS: [MetricId; 6] = [
    MetricId::Unc,
    MetricId::Ent,
    MetricId::Mm,
    MetricId::SepMax,
    MetricId::SepMin,
    MetricId::SepSum,
];

/// Everything the loop needs beyond the schedule: pooling, optimizer, and
/// metric configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub pool: PoolConfig,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Constituent metrics (and turn order) for the AG and VOTE strategies.
    pub ag_metrics: Vec<MetricId>,
    pub entropy: EntropyKind,
    /// Continue from the previous iteration's parameters instead of
    /// retraining from the shared initialization.
    pub warm_start: bool,
    /// Epoch budget for the full-train reference model.
    pub reference_epochs: usize,
}

impl HarnessConfig {
    pub fn new(pool: PoolConfig) -> Self {
        Self {
            pool,
            learning_rate: 0.1,
            batch_size: 16,
            ag_metrics: DEFAULT_AG_METRICS.to_vec(),
            entropy: EntropyKind::default(),
            warm_start: false,
            reference_epochs: 35,
        }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if dataset.train.is_empty() {
            return Err(Error::config("train split is empty"));
        }
        if dataset.eval.is_empty() {
            return Err(Error::config("eval split is empty"));
        }
        self.pool.validate(dataset.height * dataset.width)?;
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::config("learning_rate must be finite and non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if self.ag_metrics.is_empty() {
            return Err(Error::config("ag_metrics must name at least one metric"));
        }
        if self.ag_metrics.contains(&MetricId::Random) {
            return Err(Error::config("RANDOM cannot be an AG constituent"));
        }
        let mut seen = BTreeSet::new();
        for &m in &self.ag_metrics {
            if !seen.insert(m.to_string()) {
                return Err(Error::config(format!("duplicate AG constituent {m}")));
            }
        }
        Ok(())
    }
}

/// Selection policy for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Rank by one scored metric.
    Single(MetricId),
    /// Round-robin over the configured metric list.
    Ag,
    /// Vote counting over the configured metric list.
    Vote,
    /// Oracle most-classes-first ablation.
    Adversarial,
    /// Passive learning: seeded random permutation, no scoring.
    Random,
}

impl Strategy {
    /// The six single metrics, AG, and R — the default comparison suite.
    pub fn default_suite() -> Vec<Strategy> {
        let mut suite: Vec<Strategy> = MetricId::ALL_SCORED
            .into_iter()
            .map(Strategy::Single)
            .collect();
        suite.push(Strategy::Ag);
        suite.push(Strategy::Random);
        suite
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Single(m) => write!(f, "{m}"),
            Strategy::Ag => f.write_str("AG"),
            Strategy::Vote => f.write_str("VOTE"),
            Strategy::Adversarial => f.write_str("ADV"),
            Strategy::Random => f.write_str("R"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AG" => Ok(Strategy::Ag),
            "VOTE" => Ok(Strategy::Vote),
            "ADV" => Ok(Strategy::Adversarial),
            "R" | "RANDOM" => Ok(Strategy::Random),
            other => other.parse::<MetricId>().map(Strategy::Single),
        }
    }
}

/// One iteration's selection, training, and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub labeled_count: usize,
    pub selected: Vec<u64>,
    /// Value each selected sample had under the metric that chose it (vote
    /// counts for VOTE, oracle label counts for ADV).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_values: Option<Vec<f64>>,
    /// Selections contributed per constituent metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contributions: Option<Vec<(String, usize)>>,
    /// `histogram[v − 1]` = candidates that received exactly `v` votes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_histogram: Option<Vec<usize>>,
    pub training_seed: u64,
    pub epochs: usize,
    pub map: f64,
    pub relative_map: f64,
    pub selection_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// One (strategy, trial) trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: String,
    pub trial: usize,
    pub trial_seed: u64,
    pub config_hash: String,
    /// mAP of the same-seed model trained on the full train split.
    pub reference_map: f64,
    pub iterations: Vec<IterationRecord>,
}

/// One selection pass's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub selected: Vec<SampleId>,
    pub metric_values: Option<Vec<f64>>,
    pub contributions: Option<Vec<(MetricId, usize)>>,
    pub vote_histogram: Option<Vec<usize>>,
}

/// Scores the pool in parallel; result order matches `pool`.
pub fn score_predictions(params: &ScorerParams, pool: &[&LabeledSample]) -> Result<Vec<Prediction>> {
    pool.par_iter().map(|s| forward(params, &s.features)).collect()
}

enum Composer {
    RoundRobin,
    Vote,
}

fn compose_scored(
    params: &ScorerParams,
    pool: &[&LabeledSample],
    n: usize,
    metrics: &[MetricId],
    entropy: EntropyKind,
    composer: Composer,
) -> Result<Selection> {
    if metrics.is_empty() {
        return Err(Error::usage("at least one metric is required"));
    }
    // One forward pass per sample, shared by every constituent metric.
    let preds = score_predictions(params, pool)?;
    let mut rankings = Vec::with_capacity(metrics.len());
    let mut value_maps: Vec<BTreeMap<SampleId, f64>> = Vec::with_capacity(metrics.len());
    for &metric in metrics {
        let direction = metric
            .direction()
            .ok_or_else(|| Error::UnsupportedMetric("RANDOM has no ranking direction".into()))?;
        let scores = score_pool(&preds, metric, entropy)?;
        let pairs: Vec<(SampleId, f64)> = scores.iter().map(|s| (s.sample_id, s.value)).collect();
        rankings.push(Ranking {
            metric_id: metric,
            ordered: rank_by_values(&pairs, direction),
        });
        value_maps.push(pairs.into_iter().collect());
    }
    let request = SelectionRequest {
        rankings: &rankings,
        n,
    };
    let result = match composer {
        Composer::RoundRobin => metric_agnostic(&request)?,
        Composer::Vote => vote_select(&request)?,
    };
    let metric_values: Vec<f64> = match composer {
        Composer::RoundRobin => result
            .selected
            .iter()
            .zip(&result.contributed_by)
            .map(|(id, &t)| value_maps[t][id])
            .collect(),
        Composer::Vote => result
            .selected
            .iter()
            .map(|id| {
                rankings
                    .iter()
                    .filter(|r| r.ordered.iter().take(n).any(|c| c == id))
                    .count() as f64
            })
            .collect(),
    };
    Ok(Selection {
        selected: result.selected,
        metric_values: Some(metric_values),
        contributions: Some(result.per_metric),
        vote_histogram: result.vote_histogram,
    })
}

/// One selection pass. Scored strategies share a single forward pass over
/// the pool; R never scores; ADV alone reads oracle labels.
pub fn select_samples(
    strategy: Strategy,
    params: &ScorerParams,
    pool: &[&LabeledSample],
    n: usize,
    config: &HarnessConfig,
    random_seed: u64,
) -> Result<Selection> {
    if n == 0 {
        return Err(Error::usage("selection size must be at least 1"));
    }
    match strategy {
        Strategy::Random => {
            let ids: Vec<SampleId> = pool.iter().map(|s| s.features.sample_id).collect();
            let mut selected = random_ranking(&ids, random_seed).ordered;
            selected.truncate(n);
            Ok(Selection {
                selected,
                metric_values: None,
                contributions: None,
                vote_histogram: None,
            })
        }
        Strategy::Adversarial => {
            let counts: Vec<(SampleId, usize)> = pool
                .iter()
                .map(|s| {
                    (
                        s.features.sample_id,
                        s.labels.iter().filter(|&&y| y).count(),
                    )
                })
                .collect();
            let result = adversarial_select(&counts, n)?;
            let by_id: BTreeMap<SampleId, usize> = counts.into_iter().collect();
            let values = result.selected.iter().map(|id| by_id[id] as f64).collect();
            Ok(Selection {
                selected: result.selected,
                metric_values: Some(values),
                contributions: None,
                vote_histogram: None,
            })
        }
        Strategy::Single(metric) => {
            if metric == MetricId::Random {
                return Err(Error::usage("use the R strategy for random selection"));
            }
            compose_scored(params, pool, n, &[metric], config.entropy, Composer::RoundRobin)
        }
        Strategy::Ag => compose_scored(
            params,
            pool,
            n,
            &config.ag_metrics,
            config.entropy,
            Composer::RoundRobin,
        ),
        Strategy::Vote => compose_scored(
            params,
            pool,
            n,
            &config.ag_metrics,
            config.entropy,
            Composer::Vote,
        ),
    }
}

/// Runs one selection pass and reports its wall-clock cost in seconds,
/// scoring included.
pub fn time_selection(
    strategy: Strategy,
    params: &ScorerParams,
    pool: &[&LabeledSample],
    n: usize,
    config: &HarnessConfig,
    random_seed: u64,
) -> Result<(Selection, f64)> {
    let start = Instant::now();
    let selection = select_samples(strategy, params, pool, n, config, random_seed)?;
    Ok((selection, start.elapsed().as_secs_f64()))
}

/// mAP of the full-train reference model for one trial seed. Shares the
/// trial's weight initialization but trains on its own seed stream.
pub fn reference_map(dataset: &Dataset, config: &HarnessConfig, trial_seed: u64) -> Result<f64> {
    config.validate(dataset)?;
    let init = ScorerParams::init(
        dataset.classes,
        dataset.feature_dim,
        config.pool,
        seed::derive(trial_seed, streams::INIT),
    )?;
    let cfg = TrainConfig {
        epochs: config.reference_epochs,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
    };
    let trained = train(
        &init,
        &dataset.train_refs(),
        &cfg,
        seed::derive(trial_seed, streams::REFERENCE),
    )?;
    Ok(evaluate_map(&trained, &dataset.eval_refs())?.map)
}

/// One active-learning trajectory.
///
/// Iteration 0 is the baseline: a uniform seed draw plus the first training
/// pass. Each later iteration scores the unlabeled pool with the current
/// model, selects, reveals labels, retrains (from the shared initialization
/// unless warm-starting), and evaluates. A budget that outruns the pool is
/// truncated with a recorded warning.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    dataset: &Dataset,
    schedule: &Schedule,
    config: &HarnessConfig,
    strategy: Strategy,
    trial: usize,
    trial_seed: u64,
    reference: f64,
    config_hash: &str,
) -> Result<RunRecord> {
    schedule.validate_shape()?;
    config.validate(dataset)?;
    if !reference.is_finite() || reference <= 0.0 {
        return Err(Error::usage("reference mAP must be finite and positive"));
    }

    let by_id: BTreeMap<SampleId, &LabeledSample> = dataset
        .train
        .iter()
        .map(|s| (s.features.sample_id, s))
        .collect();
    let eval = dataset.eval_refs();
    let labeled_refs = |pool: &PoolState| -> Vec<&LabeledSample> {
        pool.labeled().iter().map(|id| by_id[id]).collect()
    };
    let train_cfg = |epochs: usize| TrainConfig {
        epochs,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
    };

    let init_params = ScorerParams::init(
        dataset.classes,
        dataset.feature_dim,
        config.pool,
        seed::derive(trial_seed, streams::INIT),
    )?;
    let mut pool = PoolState::new(dataset.train_ids(), dataset.eval_ids())?;
    let mut iterations = Vec::with_capacity(schedule.iterations() + 1);

    let started = Instant::now();
    let drawn = pool.seed_initial(
        schedule.initial_size,
        seed::derive(trial_seed, streams::INITIAL_POOL),
    )?;
    let selection_seconds = started.elapsed().as_secs_f64();
    let warning = (drawn.len() < schedule.initial_size).then(|| {
        format!(
            "initial draw truncated to {} of {} requested",
            drawn.len(),
            schedule.initial_size
        )
    });
    let training_seed = seed::derive2(trial_seed, streams::TRAIN, 0);
    let mut params = train(
        &init_params,
        &labeled_refs(&pool),
        &train_cfg(schedule.epochs[0]),
        training_seed,
    )?;
    let report = evaluate_map(&params, &eval)?;
    iterations.push(IterationRecord {
        iteration: 0,
        labeled_count: pool.labeled().len(),
        selected: drawn.iter().map(|id| id.0).collect(),
        metric_values: None,
        contributions: None,
        vote_histogram: None,
        training_seed,
        epochs: schedule.epochs[0],
        map: report.map,
        relative_map: 100.0 * report.map / reference,
        selection_seconds,
        warning,
    });

    for (k, &add) in schedule.additions.iter().enumerate() {
        let iteration = k + 1;
        pool.advance();
        let pool_ids = pool.unlabeled_sorted();
        let pool_samples: Vec<&LabeledSample> = pool_ids.iter().map(|id| by_id[id]).collect();
        let n = add.min(pool_samples.len());
        let mut warning = None;
        let (selection, selection_seconds) = if n == 0 {
            warning = Some("unlabeled pool exhausted; nothing selected".to_string());
            (
                Selection {
                    selected: Vec::new(),
                    metric_values: None,
                    contributions: None,
                    vote_histogram: None,
                },
                0.0,
            )
        } else {
            if n < add {
                warning = Some(format!("selection truncated to {n} of {add} requested"));
            }
            time_selection(
                strategy,
                &params,
                &pool_samples,
                n,
                config,
                seed::derive2(trial_seed, streams::RANDOM_SEL, iteration as u64),
            )?
        };
        pool.acquire(&selection.selected)?;
        let training_seed = seed::derive2(trial_seed, streams::TRAIN, iteration as u64);
        let base = if config.warm_start { &params } else { &init_params };
        params = train(
            base,
            &labeled_refs(&pool),
            &train_cfg(schedule.epochs[iteration]),
            training_seed,
        )?;
        let report = evaluate_map(&params, &eval)?;
        iterations.push(IterationRecord {
            iteration,
            labeled_count: pool.labeled().len(),
            selected: selection.selected.iter().map(|id| id.0).collect(),
            metric_values: selection.metric_values,
            contributions: selection
                .contributions
                .map(|c| c.into_iter().map(|(m, hits)| (m.to_string(), hits)).collect()),
            vote_histogram: selection.vote_histogram,
            training_seed,
            epochs: schedule.epochs[iteration],
            map: report.map,
            relative_map: 100.0 * report.map / reference,
            selection_seconds,
            warning,
        });
    }

    Ok(RunRecord {
        strategy: strategy.to_string(),
        trial,
        trial_seed,
        config_hash: config_hash.to_string(),
        reference_map: reference,
        iterations,
    })
}

/// A full experiment: every strategy across every trial, with per-trial
/// full-train references.
#[derive(Debug, Clone)]
pub struct ExperimentPlan<'a> {
    pub dataset: &'a Dataset,
    pub schedule: &'a Schedule,
    pub config: &'a HarnessConfig,
    pub strategies: &'a [Strategy],
    pub config_hash: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Strategy-major, trial-minor; matches the plan's strategy order.
    pub records: Vec<RunRecord>,
    /// Reference mAP per trial.
    pub references: Vec<f64>,
    pub curves: Vec<CurvePoint>,
}

/// One aggregated point per (strategy, iteration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub strategy: String,
    pub iteration: usize,
    pub labeled_count: usize,
    pub mean_relative_map: f64,
    /// Sample standard deviation over trials (0 for a single trial).
    pub stddev: f64,
}

/// Runs every (strategy, trial) pair in parallel and aggregates curves.
///
/// Within a trial every strategy shares the initialization, initial labeled
/// draw, training seeds, and reference model, so curves are comparable
/// point-for-point. Results are collected in plan order, making the output
/// independent of worker count.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    plan.schedule.validate_shape()?;
    plan.config.validate(plan.dataset)?;
    if plan.strategies.is_empty() {
        return Err(Error::usage("at least one strategy is required"));
    }
    let mut names = BTreeSet::new();
    for s in plan.strategies {
        if !names.insert(s.to_string()) {
            return Err(Error::config(format!("strategy {s} listed twice")));
        }
    }

    let references: Vec<f64> = plan
        .schedule
        .trial_seeds
        .par_iter()
        .map(|&ts| reference_map(plan.dataset, plan.config, ts))
        .collect::<Result<_>>()?;

    let pairs: Vec<(Strategy, usize)> = plan
        .strategies
        .iter()
        .flat_map(|&s| (0..plan.schedule.trials).map(move |t| (s, t)))
        .collect();
    let records: Vec<RunRecord> = pairs
        .par_iter()
        .map(|&(strategy, trial)| {
            run_trial(
                plan.dataset,
                plan.schedule,
                plan.config,
                strategy,
                trial,
                plan.schedule.trial_seeds[trial],
                references[trial],
                plan.config_hash,
            )
        })
        .collect::<Result<_>>()?;

    let curves = aggregate_curves(plan.strategies, plan.schedule.trials, &records);
    Ok(ExperimentOutput {
        records,
        references,
        curves,
    })
}

fn aggregate_curves(strategies: &[Strategy], trials: usize, records: &[RunRecord]) -> Vec<CurvePoint> {
    let mut curves = Vec::new();
    for (si, strategy) in strategies.iter().enumerate() {
        let runs = &records[si * trials..(si + 1) * trials];
        for i in 0..runs[0].iterations.len() {
            let values: Vec<f64> = runs.iter().map(|r| r.iterations[i].relative_map).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let stddev = if values.len() < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (values.len() - 1) as f64)
                    .sqrt()
            };
            curves.push(CurvePoint {
                strategy: strategy.to_string(),
                iteration: i,
                labeled_count: runs[0].iterations[i].labeled_count,
                mean_relative_map: mean,
                stddev,
            });
        }
    }
    curves
}

pub const CURVES_HEADER: &str = "strategy,iteration,labeled_count,mean_relative_map,stddev";

pub fn curves_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.strategy, p.iteration, p.labeled_count, p.mean_relative_map, p.stddev
        ));
    }
    out
}

pub fn runs_to_jsonl(records: &[RunRecord]) -> Result<String> {
    let mut out = String::new();
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::config(format!("run record serialization failed: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_runs_jsonl(text: &str) -> Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line)
            .map_err(|e| Error::config(format!("runs line {}: {e}", i + 1)))?;
        records.push(record);
    }
    Ok(records)
}
