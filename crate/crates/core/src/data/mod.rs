//! Dataset container, synthetic generation, and on-disk persistence.

pub mod format;
pub mod manifest;
mod synthetic;

pub use synthetic::{generate_synthetic, SynthParams};

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{FeatureGrid, LabeledSample};
use crate::SampleId;

use manifest::SplitTag;

/// A labeled corpus split into train and eval; splits are kept sorted by
/// sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub classes: usize,
    pub feature_dim: usize,
    pub height: usize,
    pub width: usize,
    pub class_names: Vec<String>,
    pub train: Vec<LabeledSample>,
    pub eval: Vec<LabeledSample>,
    /// Generation parameters; `None` for ingested datasets.
    pub provenance: Option<SynthParams>,
}

impl Dataset {
    pub fn empty() -> Self {
        Self {
            classes: 0,
            feature_dim: 0,
            height: 0,
            width: 0,
            class_names: Vec::new(),
            train: Vec::new(),
            eval: Vec::new(),
            provenance: None,
        }
    }

    pub fn train_ids(&self) -> Vec<SampleId> {
        self.train.iter().map(|s| s.features.sample_id).collect()
    }

    pub fn eval_ids(&self) -> Vec<SampleId> {
        self.eval.iter().map(|s| s.features.sample_id).collect()
    }

    pub fn train_refs(&self) -> Vec<&LabeledSample> {
        self.train.iter().collect()
    }

    pub fn eval_refs(&self) -> Vec<&LabeledSample> {
        self.eval.iter().collect()
    }

    /// Structural invariants: unique ids, consistent shapes and label
    /// lengths across both splits.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for sample in self.train.iter().chain(&self.eval) {
            let grid = &sample.features;
            if !ids.insert(grid.sample_id) {
                return Err(Error::config(format!(
                    "duplicate sample id {}",
                    grid.sample_id
                )));
            }
            if grid.height != self.height
                || grid.width != self.width
                || grid.feature_dim != self.feature_dim
            {
                return Err(Error::config(format!(
                    "sample {} has shape {}×{}×{}, dataset is {}×{}×{}",
                    grid.sample_id,
                    grid.height,
                    grid.width,
                    grid.feature_dim,
                    self.height,
                    self.width,
                    self.feature_dim
                )));
            }
            if sample.labels.len() != self.classes {
                return Err(Error::config(format!(
                    "sample {} carries {} labels for {} classes",
                    grid.sample_id,
                    sample.labels.len(),
                    self.classes
                )));
            }
        }
        Ok(())
    }
}

fn feature_file_name(id: SampleId) -> String {
    format!("{:08}.alcv", id.0)
}

/// Writes one feature file per sample plus `manifest.csv`; overwrites any
/// previous copy. Returns the manifest path.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<PathBuf> {
    dataset.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut lines = vec![manifest::HEADER.to_string()];
    for (samples, split) in [(&dataset.train, SplitTag::Train), (&dataset.eval, SplitTag::Eval)] {
        for sample in samples.iter() {
            let id = sample.features.sample_id;
            let name = feature_file_name(id);
            format::write_tensor(
                &dir.join(&name),
                sample.features.height,
                sample.features.width,
                sample.features.feature_dim,
                sample.features.data(),
            )?;
            lines.push(manifest::render_row(id.0, &name, &sample.labels, split));
        }
    }
    lines.push(String::new());
    let path = dir.join("manifest.csv");
    fs::write(&path, lines.join("\n")).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Loads a dataset from a manifest file, validating every row.
///
/// The class count is inferred from the label fields (bitmask width, or max
/// class index + 1), so a class absent from every row is invisible here.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = manifest::parse_manifest(&text)?;
    if rows.is_empty() {
        log::warn!("manifest {} lists no samples", path.display());
        return Ok(Dataset::empty());
    }
    let (classes, labels) = manifest::decode_labels(&rows)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for (row, labels) in rows.iter().zip(labels) {
        let file = base.join(&row.path);
        let (height, width, feature_dim, values) = match format::read_tensor(&file) {
            Ok(tensor) => tensor,
            Err(Error::Io { path, source }) => {
                return Err(Error::ManifestMissingFile {
                    row: row.line,
                    path,
                    source,
                })
            }
            Err(other) => return Err(other),
        };
        match dims {
            None => dims = Some((height, width, feature_dim)),
            Some(expect) => {
                if expect != (height, width, feature_dim) {
                    return Err(Error::ManifestShape {
                        row: row.line,
                        detail: format!(
                            "{} is {height}×{width}×{feature_dim}, dataset is {}×{}×{}",
                            row.path, expect.0, expect.1, expect.2
                        ),
                    });
                }
            }
        }
        let features = FeatureGrid::new(SampleId(row.sample_id), height, width, feature_dim, values)
            .map_err(|e| Error::ManifestShape {
                row: row.line,
                detail: e.to_string(),
            })?;
        let sample = LabeledSample { features, labels };
        match row.split {
            SplitTag::Train => train.push(sample),
            SplitTag::Eval => eval.push(sample),
        }
    }
    train.sort_by_key(|s| s.features.sample_id);
    eval.sort_by_key(|s| s.features.sample_id);

    for class in 0..classes {
        if !eval.iter().any(|s| s.labels[class]) {
            log::warn!("class {class} has no positive in the eval split");
        }
    }

    let (height, width, feature_dim) = dims.expect("at least one row");
    let dataset = Dataset {
        classes,
        feature_dim,
        height,
        width,
        class_names: (0..classes).map(|j| format!("class{j}")).collect(),
        train,
        eval,
        provenance: None,
    };
    dataset.validate()?;
    Ok(dataset)
}
