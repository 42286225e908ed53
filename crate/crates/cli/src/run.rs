//! `alpool run`: execute the configured experiment and write its outputs.
//!
//! Produces three files in the output directory: `config.snapshot` (the
//! merged settings the run actually used), `runs.jsonl` (one record per
//! strategy × trial), and `curves.csv` (per-iteration mean relative mAP).

use std::fs;
use std::path::Path;

use log::info;

use alpool::harness::{curves_to_csv, run_experiment, runs_to_jsonl, ExperimentPlan};
use alpool::{Error, Result};

use crate::config::{config_hash, ExperimentConfig};
use crate::report;

pub fn cmd_run(config: &ExperimentConfig) -> Result<()> {
    let dataset = config.load_dataset()?;
    let schedule = config.schedule()?;
    let harness = config.harness(dataset.height, dataset.width)?;
    let strategies = config.strategies()?;
    // Everything is validated before the output directory is touched; an
    // infeasible schedule must not leave partial files behind.
    schedule.validate_budget(dataset.train.len())?;
    harness.validate(&dataset)?;
    let snapshot = config.snapshot_text()?;
    let hash = config_hash(&snapshot);

    info!(
        "running {} strategies × {} trials on {} train / {} eval samples (config {hash})",
        strategies.len(),
        schedule.trials,
        dataset.train.len(),
        dataset.eval.len(),
    );
    let plan = ExperimentPlan {
        dataset: &dataset,
        schedule: &schedule,
        config: &harness,
        strategies: &strategies,
        config_hash: &hash,
    };
    let output = run_experiment(&plan)?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(
        &dir.join("config.snapshot"),
        &format!("# config_hash: {hash}\n{snapshot}"),
    )?;
    write(&dir.join("runs.jsonl"), &runs_to_jsonl(&output.records)?)?;
    write(&dir.join("curves.csv"), &curves_to_csv(&output.curves))?;

    print!("{}", report::final_table(&output.records));
    println!("outputs in {}", dir.display());
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
