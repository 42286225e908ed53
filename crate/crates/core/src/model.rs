//! Trainable multi-label scorer: a per-cell linear map composed with spatial
//! pooling, trained with per-class binary cross-entropy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scoremap::{pool_forward, wildcat_class_pool, PoolConfig, PoolTrace};
use crate::{seed, SampleId};

/// Confidences are clamped to `[CONFIDENCE_CLAMP, 1 − CONFIDENCE_CLAMP]`
/// before any logarithm.
pub const CONFIDENCE_CLAMP: f64 = 1e-7;

/// Per-sample spatial grid of feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    pub sample_id: SampleId,
    pub height: usize,
    pub width: usize,
    pub feature_dim: usize,
    /// `height · width · feature_dim` values; cells row-major, features
    /// contiguous per cell.
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(
        sample_id: SampleId,
        height: usize,
        width: usize,
        feature_dim: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if height == 0 || width == 0 || feature_dim == 0 {
            return Err(Error::config("feature grid dimensions must all be at least 1"));
        }
        let expect = height * width * feature_dim;
        if data.len() != expect {
            return Err(Error::config(format!(
                "feature grid holds {} values, shape implies {expect}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("feature grid contains non-finite values"));
        }
        Ok(Self {
            sample_id,
            height,
            width,
            feature_dim,
            data,
        })
    }

    pub fn cells(&self) -> usize {
        self.height * self.width
    }

    /// Feature vector of one cell (row-major index).
    pub fn cell(&self, index: usize) -> &[f64] {
        &self.data[index * self.feature_dim..(index + 1) * self.feature_dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// A feature grid together with its oracle label bitvector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureGrid,
    pub labels: Vec<bool>,
}

/// Trainable parameters of the scorer.
///
/// Row `class · maps_per_class + modality` of `weights` scores one
/// class–modality map; `maps_per_class` comes from `pool`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerParams {
    pub classes: usize,
    pub feature_dim: usize,
    /// `(classes · maps_per_class) × feature_dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub pool: PoolConfig,
}

impl ScorerParams {
    /// All-zero parameters (confidence 0.5 everywhere).
    pub fn zeros(classes: usize, feature_dim: usize, pool: PoolConfig) -> Result<Self> {
        if classes == 0 || feature_dim == 0 {
            return Err(Error::config("classes and feature_dim must be at least 1"));
        }
        if pool.maps_per_class == 0 {
            return Err(Error::config("maps_per_class must be at least 1"));
        }
        let rows = classes * pool.maps_per_class;
        Ok(Self {
            classes,
            feature_dim,
            weights: vec![0.0; rows * feature_dim],
            bias: vec![0.0; rows],
            pool,
        })
    }

    /// Seeded small-weight initialization (zero bias).
    pub fn init(classes: usize, feature_dim: usize, pool: PoolConfig, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(classes, feature_dim, pool)?;
        let normal = Normal::new(0.0, 0.01).expect("valid stddev");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in &mut params.weights {
            *w = normal.sample(&mut rng);
        }
        Ok(params)
    }

    pub fn rows(&self) -> usize {
        self.classes * self.pool.maps_per_class
    }

    fn validate_against(&self, x: &FeatureGrid) -> Result<()> {
        if x.feature_dim != self.feature_dim {
            return Err(Error::config(format!(
                "feature dim {} does not match scorer dim {}",
                x.feature_dim, self.feature_dim
            )));
        }
        if self.weights.len() != self.rows() * self.feature_dim
            || self.bias.len() != self.rows()
        {
            return Err(Error::config("scorer parameter shapes are inconsistent"));
        }
        self.pool.validate(x.cells())
    }
}

/// Per-class confidences, separations, and raw pooled scores for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub sample_id: SampleId,
    /// `sigmoid(class_score)` per class.
    pub confidences: Vec<f64>,
    /// Foreground–background separation per class.
    pub separations: Vec<f64>,
    pub class_scores: Vec<f64>,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Forward pass, also returning the per-class pooling traces.
fn forward_traced(params: &ScorerParams, x: &FeatureGrid) -> Result<(Prediction, Vec<PoolTrace>)> {
    params.validate_against(x)?;
    let cells = x.cells();
    let rows = params.rows();
    let dim = params.feature_dim;

    let mut raw = vec![0.0; rows * cells];
    for r in 0..rows {
        let w = &params.weights[r * dim..(r + 1) * dim];
        let b = params.bias[r];
        let out = &mut raw[r * cells..(r + 1) * cells];
        for (i, slot) in out.iter_mut().enumerate() {
            let feat = x.cell(i);
            let mut acc = b;
            for (wv, fv) in w.iter().zip(feat) {
                acc += wv * fv;
            }
            *slot = acc;
        }
    }

    let class_maps = if params.pool.maps_per_class > 1 {
        wildcat_class_pool(&raw, params.pool.maps_per_class, cells)?
    } else {
        raw
    };

    let mut confidences = Vec::with_capacity(params.classes);
    let mut separations = Vec::with_capacity(params.classes);
    let mut class_scores = Vec::with_capacity(params.classes);
    let mut traces = Vec::with_capacity(params.classes);
    for j in 0..params.classes {
        let map = &class_maps[j * cells..(j + 1) * cells];
        let (summary, trace) = pool_forward(map, &params.pool)?;
        confidences.push(sigmoid(summary.class_score));
        separations.push(summary.separation);
        class_scores.push(summary.class_score);
        traces.push(trace);
    }
    let pred = Prediction {
        sample_id: x.sample_id,
        confidences,
        separations,
        class_scores,
    };
    Ok((pred, traces))
}

/// Scores one sample.
pub fn forward(params: &ScorerParams, x: &FeatureGrid) -> Result<Prediction> {
    forward_traced(params, x).map(|(pred, _)| pred)
}

/// Mean over classes of binary cross-entropy against `labels`.
pub fn loss(pred: &Prediction, labels: &[bool]) -> Result<f64> {
    if labels.len() != pred.confidences.len() {
        return Err(Error::config(format!(
            "{} labels for {} classes",
            labels.len(),
            pred.confidences.len()
        )));
    }
    let mut total = 0.0;
    for (&p, &y) in pred.confidences.iter().zip(labels) {
        let p = p.clamp(CONFIDENCE_CLAMP, 1.0 - CONFIDENCE_CLAMP);
        total -= if y { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(total / labels.len() as f64)
}

/// Gradient of [`loss`] with respect to every parameter.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradients {
    fn zeros(params: &ScorerParams) -> Self {
        Self {
            weights: vec![0.0; params.weights.len()],
            bias: vec![0.0; params.bias.len()],
        }
    }

    fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += scale * b;
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += scale * b;
        }
    }
}

/// Loss and its exact gradient for one sample.
///
/// The clamp is part of the function being differentiated: a confidence in
/// the clamped region contributes zero gradient.
pub fn loss_gradient(
    params: &ScorerParams,
    sample: &LabeledSample,
) -> Result<(f64, Gradients)> {
    let (pred, traces) = forward_traced(params, &sample.features)?;
    let value = loss(&pred, &sample.labels)?;

    let classes = params.classes;
    let maps = params.pool.maps_per_class;
    let dim = params.feature_dim;
    let mut grad = Gradients::zeros(params);
    for j in 0..classes {
        let p = pred.confidences[j];
        if p <= CONFIDENCE_CLAMP || p >= 1.0 - CONFIDENCE_CLAMP {
            continue;
        }
        let y = if sample.labels[j] { 1.0 } else { 0.0 };
        let upstream = (p - y) / classes as f64;
        let cell_grad = traces[j].backward(upstream);
        for (i, &g) in cell_grad.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let g = g / maps as f64;
            let feat = sample.features.cell(i);
            for m in 0..maps {
                let r = j * maps + m;
                let row = &mut grad.weights[r * dim..(r + 1) * dim];
                for (slot, fv) in row.iter_mut().zip(feat) {
                    *slot += g * fv;
                }
                grad.bias[r] += g;
            }
        }
    }
    Ok((value, grad))
}

/// SGD hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 35,
            learning_rate: 0.1,
            batch_size: 16,
        }
    }
}

/// Mini-batch SGD from `params`; deterministic given `(seed, data set)`.
/// The sample order is canonicalized by id before the epoch shuffles, so the
/// result does not depend on how the caller ordered `data`.
pub fn train(
    params: &ScorerParams,
    data: &[&LabeledSample],
    cfg: &TrainConfig,
    seed_value: u64,
) -> Result<ScorerParams> {
    if data.is_empty() {
        return Err(Error::usage("training requires at least one labeled sample"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::config("batch_size must be at least 1"));
    }
    if !cfg.learning_rate.is_finite() || cfg.learning_rate < 0.0 {
        return Err(Error::config("learning_rate must be finite and non-negative"));
    }
    let mut params = params.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by_key(|&i| data[i].features.sample_id);
    for epoch in 0..cfg.epochs {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed::derive2(seed_value, seed::streams::SHUFFLE, epoch as u64));
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut acc = Gradients::zeros(&params);
            for &si in batch {
                let (_, g) = loss_gradient(&params, data[si])?;
                acc.add_scaled(&g, 1.0);
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (w, g) in params.weights.iter_mut().zip(&acc.weights) {
                *w -= step * g;
            }
            for (b, g) in params.bias.iter_mut().zip(&acc.bias) {
                *b -= step * g;
            }
        }
    }
    Ok(params)
}

/// Per-class average precision and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MapReport {
    /// Mean over classes that have at least one positive.
    pub map: f64,
    /// `None` for classes with no eval positives (excluded from the mean).
    pub per_class_ap: Vec<Option<f64>>,
}

impl MapReport {
    pub fn excluded_classes(&self) -> Vec<usize> {
        self.per_class_ap
            .iter()
            .enumerate()
            .filter(|(_, ap)| ap.is_none())
            .map(|(j, _)| j)
            .collect()
    }
}

/// Mean average precision over an evaluation set.
///
/// Per class, samples rank by confidence descending with ties broken by
/// ascending sample id; AP averages precision at each positive hit.
pub fn evaluate_map(params: &ScorerParams, eval: &[&LabeledSample]) -> Result<MapReport> {
    if eval.is_empty() {
        return Err(Error::usage("evaluation set is empty"));
    }
    let mut preds = Vec::with_capacity(eval.len());
    for sample in eval {
        if sample.labels.len() != params.classes {
            return Err(Error::config(format!(
                "sample {} carries {} labels for {} classes",
                sample.features.sample_id,
                sample.labels.len(),
                params.classes
            )));
        }
        preds.push(forward(params, &sample.features)?);
    }

    let mut per_class_ap = Vec::with_capacity(params.classes);
    let mut total = 0.0;
    let mut included = 0usize;
    for j in 0..params.classes {
        let mut ranked: Vec<(f64, SampleId, bool)> = preds
            .iter()
            .zip(eval)
            .map(|(pred, sample)| (pred.confidences[j], pred.sample_id, sample.labels[j]))
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let positives = ranked.iter().filter(|(_, _, y)| *y).count();
        if positives == 0 {
            per_class_ap.push(None);
            continue;
        }
        let mut hits = 0usize;
        let mut precision_sum = 0.0;
        for (rank, (_, _, y)) in ranked.iter().enumerate() {
            if *y {
                hits += 1;
                precision_sum += hits as f64 / (rank + 1) as f64;
            }
        }
        let ap = precision_sum / positives as f64;
        per_class_ap.push(Some(ap));
        total += ap;
        included += 1;
    }
    if included == 0 {
        return Err(Error::usage("evaluation set has no positive labels"));
    }
    Ok(MapReport {
        map: total / included as f64,
        per_class_ap,
    })
}
