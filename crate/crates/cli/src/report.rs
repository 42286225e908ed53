//! `alpool report`: summarize a completed run directory from `runs.jsonl`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use alpool::harness::{parse_runs_jsonl, RunRecord};
use alpool::{Error, Result};

pub fn cmd_report(dir: &Path) -> Result<()> {
    let runs_path = dir.join("runs.jsonl");
    let text = fs::read_to_string(&runs_path).map_err(|e| Error::io(&runs_path, e))?;
    let records = parse_runs_jsonl(&text)?;
    if records.is_empty() {
        return Err(Error::config(format!(
            "{}: no run records",
            runs_path.display()
        )));
    }

    let hashes: BTreeSet<&str> = records.iter().map(|r| r.config_hash.as_str()).collect();
    println!("run directory: {}", dir.display());
    println!(
        "config hash: {}",
        hashes.into_iter().collect::<Vec<_>>().join(", ")
    );
    print_references(&records);
    println!();
    print!("{}", final_table(&records));
    println!();
    print!("{}", iteration_table(&records));
    if let Some(votes) = vote_table(&records) {
        println!();
        print!("{votes}");
    }
    let warnings = warning_lines(&records);
    if !warnings.is_empty() {
        println!();
        println!("warnings:");
        for line in warnings {
            println!("  {line}");
        }
    }
    Ok(())
}

/// Records grouped by strategy, in first-appearance order.
fn by_strategy(records: &[RunRecord]) -> Vec<(&str, Vec<&RunRecord>)> {
    let mut groups: Vec<(&str, Vec<&RunRecord>)> = Vec::new();
    for record in records {
        match groups.iter_mut().find(|(name, _)| *name == record.strategy) {
            Some((_, list)) => list.push(record),
            None => groups.push((record.strategy.as_str(), vec![record])),
        }
    }
    groups
}

/// Mean and sample standard deviation (zero below two values).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    };
    (mean, std)
}

fn print_references(records: &[RunRecord]) {
    let first = &records[0].strategy;
    let refs: Vec<String> = records
        .iter()
        .filter(|r| &r.strategy == first)
        .map(|r| format!("{:.4}", r.reference_map))
        .collect();
    println!("reference mAP per trial: {}", refs.join(" "));
}

/// Per-strategy final relative mAP. Shared with `run`'s stdout summary.
pub fn final_table(records: &[RunRecord]) -> String {
    let mut out = String::from("final relative mAP (mean ± std over trials):\n");
    out.push_str("  strategy  labeled     mean      std  trials\n");
    for (name, runs) in by_strategy(records) {
        let finals: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.iterations.last().map(|it| it.relative_map))
            .collect();
        if finals.is_empty() {
            continue;
        }
        let labeled = runs[0].iterations.last().map_or(0, |it| it.labeled_count);
        let (mean, std) = mean_std(&finals);
        out.push_str(&format!(
            "  {name:<8} {labeled:>8} {mean:>8.3} {std:>8.3} {:>7}\n",
            finals.len()
        ));
    }
    out
}

fn iteration_table(records: &[RunRecord]) -> String {
    let groups = by_strategy(records);
    let iterations = records.iter().map(|r| r.iterations.len()).max().unwrap_or(0);
    let mut out = String::from("mean relative mAP by iteration:\n");
    out.push_str("  iter  labeled");
    for (name, _) in &groups {
        out.push_str(&format!(" {name:>8}"));
    }
    out.push('\n');
    for i in 0..iterations {
        let labeled = records
            .iter()
            .find_map(|r| r.iterations.get(i).map(|it| it.labeled_count));
        let labeled = labeled.map_or_else(|| "-".to_string(), |l| l.to_string());
        out.push_str(&format!("  {i:<5} {labeled:>8}"));
        for (_, runs) in &groups {
            let values: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.iterations.get(i).map(|it| it.relative_map))
                .collect();
            if values.is_empty() {
                out.push_str(&format!(" {:>8}", "-"));
            } else {
                out.push_str(&format!(" {:>8.3}", mean_std(&values).0));
            }
        }
        out.push('\n');
    }
    out
}

/// Vote counts per sample for VOTE selections, summed element-wise across
/// trials; `None` when no record carries a histogram.
fn vote_table(records: &[RunRecord]) -> Option<String> {
    let width = records
        .iter()
        .flat_map(|r| &r.iterations)
        .filter_map(|it| it.vote_histogram.as_ref())
        .map(|h| h.len())
        .max()?;
    let iterations = records.iter().map(|r| r.iterations.len()).max().unwrap_or(0);
    let mut out = String::from("vote histogram (samples per vote count, summed over trials):\n");
    out.push_str("  iter ");
    for votes in 1..=width {
        out.push_str(&format!(" {votes:>7}"));
    }
    out.push('\n');
    let mut total = vec![0usize; width];
    for i in 0..iterations {
        let mut row = vec![0usize; width];
        let mut any = false;
        for record in records {
            if let Some(hist) = record.iterations.get(i).and_then(|it| it.vote_histogram.as_ref())
            {
                any = true;
                for (slot, &count) in row.iter_mut().zip(hist) {
                    *slot += count;
                }
            }
        }
        if !any {
            continue;
        }
        out.push_str(&format!("  {i:<5}"));
        for count in &row {
            out.push_str(&format!(" {count:>7}"));
        }
        out.push('\n');
        for (slot, count) in total.iter_mut().zip(&row) {
            *slot += count;
        }
    }
    out.push_str("  total");
    for count in &total {
        out.push_str(&format!(" {count:>7}"));
    }
    out.push('\n');
    Some(out)
}

fn warning_lines(records: &[RunRecord]) -> Vec<String> {
    let mut out = Vec::new();
    for record in records {
        for it in &record.iterations {
            if let Some(warning) = &it.warning {
                out.push(format!(
                    "{} trial {} iteration {}: {warning}",
                    record.strategy, record.trial, it.iteration
                ));
            }
        }
    }
    out
}
