//! Score maps and the two spatial pooling schemes.
//!
//! A [`ScoreMap`] holds raw per-class (optionally per-modality) cell scores
//! for one sample. Pooling reduces each class map to a single class score
//! plus a foreground–background separation value, recording which cells were
//! selected so gradients can be routed back through the reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SampleId;

/// Spatial pooling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    /// `(mean of k_top largest + mean of k_bot smallest) / 2`.
    Weldon,
    /// `mean of k_top largest + alpha · mean of k_bot smallest`, applied after
    /// class-wise pooling of the per-class modality maps.
    Wildcat,
}

/// How the per-class separation value is computed from a class map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationKind {
    /// `max cell − min cell`. The default.
    Extremes,
    /// `mean of k_top largest − mean of k_bot smallest`.
    PooledMeans,
}

/// Pooling hyperparameters.
///
/// `k_top` and `k_bot` must each lie in `[1, H·W]`; the top and bottom
/// selections may overlap (with `k_top = k_bot = H·W` Weldon pooling is the
/// plain mean of the map).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub mode: PoolMode,
    pub k_top: usize,
    pub k_bot: usize,
    /// Weight on the bottom-instance mean, Wildcat mode only. In `[0, 1]`.
    pub alpha: f64,
    /// Modality maps per class, Wildcat mode only.
    pub maps_per_class: usize,
    pub separation: SeparationKind,
}

impl PoolConfig {
    /// Default instance count: 10% of the grid, at least one cell.
    pub fn auto_k(height: usize, width: usize) -> usize {
        (((height * width) as f64 * 0.1).round() as usize).max(1)
    }

    pub fn weldon(height: usize, width: usize) -> Self {
        let k = Self::auto_k(height, width);
        Self {
            mode: PoolMode::Weldon,
            k_top: k,
            k_bot: k,
            alpha: 1.0,
            maps_per_class: 1,
            separation: SeparationKind::Extremes,
        }
    }

    pub fn wildcat(height: usize, width: usize, maps_per_class: usize) -> Self {
        Self {
            mode: PoolMode::Wildcat,
            maps_per_class,
            ..Self::weldon(height, width)
        }
    }

    /// Checks the configuration against a concrete cell count.
    pub fn validate(&self, cells: usize) -> Result<()> {
        if cells == 0 {
            return Err(Error::config("score map must have at least one cell"));
        }
        if self.k_top == 0 || self.k_bot == 0 {
            return Err(Error::config("k_top and k_bot must be at least 1"));
        }
        if self.k_top > cells || self.k_bot > cells {
            return Err(Error::config(format!(
                "k_top={} / k_bot={} exceed the {cells}-cell grid",
                self.k_top, self.k_bot
            )));
        }
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.maps_per_class == 0 {
            return Err(Error::config("maps_per_class must be at least 1"));
        }
        Ok(())
    }
}

/// Pooled score and separation for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSummary {
    pub class_score: f64,
    /// Foreground–background gap; ≥ 0, and 0 exactly when the selected
    /// extremes coincide (constant map under [`SeparationKind::Extremes`]).
    pub separation: f64,
}

/// Cell selections recorded by a forward pooling pass.
///
/// Holding a trace is the proof that a forward pass ran; gradient routing is
/// only reachable through it.
#[derive(Debug, Clone)]
pub struct PoolTrace {
    cells: usize,
    top: Vec<usize>,
    bot: Vec<usize>,
    top_weight: f64,
    bot_weight: f64,
}

impl PoolTrace {
    /// Distributes `upstream` over the cells selected by the forward pass.
    /// Cells selected as both top and bottom accumulate both contributions.
    pub fn backward(&self, upstream: f64) -> Vec<f64> {
        let mut grad = vec![0.0; self.cells];
        for &i in &self.top {
            grad[i] += upstream * self.top_weight;
        }
        for &i in &self.bot {
            grad[i] += upstream * self.bot_weight;
        }
        grad
    }

    /// Selected top cells, best first.
    pub fn top_cells(&self) -> &[usize] {
        &self.top
    }

    /// Selected bottom cells, smallest first.
    pub fn bot_cells(&self) -> &[usize] {
        &self.bot
    }
}

/// Indices of the `k` largest cells; ties go to the lower row-major index.
fn top_indices(map: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..map.len()).collect();
    idx.sort_unstable_by(|&a, &b| map[b].total_cmp(&map[a]).then_with(|| a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Indices of the `k` smallest cells; ties go to the lower row-major index.
fn bot_indices(map: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..map.len()).collect();
    idx.sort_unstable_by(|&a, &b| map[a].total_cmp(&map[b]).then_with(|| a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn mean_at(map: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| map[i]).sum::<f64>() / idx.len() as f64
}

/// Pools one class map, returning the summary and the trace for backward.
pub fn pool_forward(map: &[f64], cfg: &PoolConfig) -> Result<(ClassSummary, PoolTrace)> {
    cfg.validate(map.len())?;
    let top = top_indices(map, cfg.k_top);
    let bot = bot_indices(map, cfg.k_bot);
    let mean_top = mean_at(map, &top);
    let mean_bot = mean_at(map, &bot);
    let (class_score, top_weight, bot_weight) = match cfg.mode {
        PoolMode::Weldon => (
            (mean_top + mean_bot) / 2.0,
            1.0 / (2.0 * cfg.k_top as f64),
            1.0 / (2.0 * cfg.k_bot as f64),
        ),
        PoolMode::Wildcat => (
            mean_top + cfg.alpha * mean_bot,
            1.0 / cfg.k_top as f64,
            cfg.alpha / cfg.k_bot as f64,
        ),
    };
    let separation = match cfg.separation {
        SeparationKind::Extremes => map[top[0]] - map[bot[0]],
        SeparationKind::PooledMeans => mean_top - mean_bot,
    };
    let summary = ClassSummary {
        class_score,
        separation,
    };
    let trace = PoolTrace {
        cells: map.len(),
        top,
        bot,
        top_weight,
        bot_weight,
    };
    Ok((summary, trace))
}

/// WELDON pooling of one class map.
pub fn weldon_pool(map: &[f64], cfg: &PoolConfig) -> Result<ClassSummary> {
    if cfg.mode != PoolMode::Weldon {
        return Err(Error::config("weldon_pool requires mode = weldon"));
    }
    pool_forward(map, cfg).map(|(summary, _)| summary)
}

/// WILDCAT spatial pooling of one (already class-pooled) class map.
pub fn wildcat_spatial_pool(map: &[f64], cfg: &PoolConfig) -> Result<ClassSummary> {
    if cfg.mode != PoolMode::Wildcat {
        return Err(Error::config("wildcat_spatial_pool requires mode = wildcat"));
    }
    pool_forward(map, cfg).map(|(summary, _)| summary)
}

/// Cell-wise mean over each class's `maps_per_class` modality maps.
///
/// `raw` holds `C · maps_per_class` maps of `cells` values each, grouped by
/// class; the result holds `C` maps.
pub fn wildcat_class_pool(raw: &[f64], maps_per_class: usize, cells: usize) -> Result<Vec<f64>> {
    if maps_per_class == 0 || cells == 0 {
        return Err(Error::config("maps_per_class and cell count must be at least 1"));
    }
    let stride = maps_per_class * cells;
    if raw.len() % stride != 0 {
        return Err(Error::config(format!(
            "raw score length {} is not a multiple of maps_per_class·cells = {stride}",
            raw.len()
        )));
    }
    let classes = raw.len() / stride;
    let mut out = vec![0.0; classes * cells];
    for c in 0..classes {
        for m in 0..maps_per_class {
            let map = &raw[(c * maps_per_class + m) * cells..(c * maps_per_class + m + 1) * cells];
            for (acc, v) in out[c * cells..(c + 1) * cells].iter_mut().zip(map) {
                *acc += v;
            }
        }
        for acc in &mut out[c * cells..(c + 1) * cells] {
            *acc /= maps_per_class as f64;
        }
    }
    Ok(out)
}

/// Raw per-class cell scores for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    pub sample_id: SampleId,
    pub classes: usize,
    pub maps_per_class: usize,
    pub height: usize,
    pub width: usize,
    values: Vec<f64>,
}

impl ScoreMap {
    /// `values` is `(classes · maps_per_class) × height × width`, map-major,
    /// cells in row-major order; all entries must be finite.
    pub fn new(
        sample_id: SampleId,
        classes: usize,
        maps_per_class: usize,
        height: usize,
        width: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if classes == 0 || maps_per_class == 0 || height == 0 || width == 0 {
            return Err(Error::config("score map dimensions must all be at least 1"));
        }
        let expect = classes * maps_per_class * height * width;
        if values.len() != expect {
            return Err(Error::config(format!(
                "score map holds {} values, shape implies {expect}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("score map contains non-finite values"));
        }
        Ok(Self {
            sample_id,
            classes,
            maps_per_class,
            height,
            width,
            values,
        })
    }

    pub fn cells(&self) -> usize {
        self.height * self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One raw map (class–modality pair); `index < classes · maps_per_class`.
    pub fn raw_map(&self, index: usize) -> &[f64] {
        let cells = self.cells();
        &self.values[index * cells..(index + 1) * cells]
    }

    /// One class map; only valid once `maps_per_class == 1`.
    pub fn class_map(&self, class: usize) -> &[f64] {
        assert_eq!(
            self.maps_per_class, 1,
            "class_map requires class-pooled scores"
        );
        self.raw_map(class)
    }

    /// Class-wise pooled copy (`maps_per_class` collapses to 1).
    pub fn class_pooled(&self) -> ScoreMap {
        let values = wildcat_class_pool(&self.values, self.maps_per_class, self.cells())
            .expect("validated shape");
        ScoreMap {
            sample_id: self.sample_id,
            classes: self.classes,
            maps_per_class: 1,
            height: self.height,
            width: self.width,
            values,
        }
    }
}
