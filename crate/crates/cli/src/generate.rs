//! `alpool generate`: write a synthetic dataset to disk.

use alpool::data::{generate_synthetic, save_dataset};
use alpool::{Error, Result};

use crate::config::{ExperimentConfig, SourceKind};

pub fn cmd_generate(config: &ExperimentConfig) -> Result<()> {
    if config.dataset.source != SourceKind::Synthetic {
        return Err(Error::usage(
            "generate writes synthetic datasets; set dataset.source = \"synthetic\"",
        ));
    }
    let dataset = generate_synthetic(&config.dataset.synthetic)?;
    let manifest = save_dataset(&dataset, &config.output_dir)?;
    println!(
        "wrote {} train + {} eval samples ({} classes, {}×{}×{} features) to {}",
        dataset.train.len(),
        dataset.eval.len(),
        dataset.classes,
        dataset.feature_dim,
        dataset.height,
        dataset.width,
        manifest.display()
    );
    Ok(())
}
