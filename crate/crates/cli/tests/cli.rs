//! End-to-end tests of the `alpool` binary: exit codes, output files, and
//! determinism of re-runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn alpool() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alpool"))
}

fn write_config(dir: &Path, out_dir: &Path) -> PathBuf {
    let body = format!(
        r#"
seed = 7
output_dir = "{}"
strategies = ["UNC", "AG", "R"]

[dataset.synthetic]
classes = 2
feature_dim = 4
height = 3
width = 3
train_samples = 24
eval_samples = 10
blob_height = 2
blob_width = 2
max_labels = 2

[schedule]
initial_size = 4
additions = [4]
epochs = [3, 3]
trials = 2
"#,
        out_dir.display()
    );
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn run_writes_outputs_and_report_reads_them() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &out);

    let run = alpool().args(["--config"]).arg(&config).arg("run").output().unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    assert!(stdout(&run).contains("final relative mAP"), "{}", stdout(&run));

    for file in ["config.snapshot", "runs.jsonl", "curves.csv"] {
        assert!(out.join(file).is_file(), "{file} missing");
    }
    let curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(
        curves.starts_with("strategy,iteration,labeled_count,mean_relative_map,stddev\n"),
        "{curves}"
    );
    // 3 strategies × 2 iterations, plus the header.
    assert_eq!(curves.lines().count(), 7, "{curves}");
    let snapshot = fs::read_to_string(out.join("config.snapshot")).unwrap();
    assert!(snapshot.starts_with("# config_hash: "), "{snapshot}");
    assert!(snapshot.contains("seed = 7"), "{snapshot}");

    let report = alpool().arg("report").arg(&out).output().unwrap();
    assert!(report.status.success(), "stderr: {}", stderr(&report));
    let text = stdout(&report);
    for needle in ["reference mAP per trial", "UNC", "AG", "mean relative mAP by iteration"] {
        assert!(text.contains(needle), "missing {needle:?} in: {text}");
    }
}

#[test]
fn rerunning_reproduces_the_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &out);

    assert!(alpool().arg("--config").arg(&config).arg("run").output().unwrap().status.success());
    let curves_a = fs::read(out.join("curves.csv")).unwrap();
    let snapshot_a = fs::read(out.join("config.snapshot")).unwrap();

    assert!(alpool().arg("--config").arg(&config).arg("run").output().unwrap().status.success());
    assert_eq!(curves_a, fs::read(out.join("curves.csv")).unwrap());
    assert_eq!(snapshot_a, fs::read(out.join("config.snapshot")).unwrap());
}

#[test]
fn worker_count_does_not_change_the_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out_serial = tmp.path().join("serial");
    let out_parallel = tmp.path().join("parallel");
    let config = write_config(tmp.path(), &out_serial);

    let serial = alpool()
        .arg("--config").arg(&config).args(["--jobs", "1", "run"])
        .output().unwrap();
    assert!(serial.status.success(), "stderr: {}", stderr(&serial));
    let parallel = alpool()
        .arg("--config").arg(&config).arg("--out").arg(&out_parallel)
        .args(["--jobs", "2", "run"])
        .output().unwrap();
    assert!(parallel.status.success(), "stderr: {}", stderr(&parallel));

    assert_eq!(
        fs::read(out_serial.join("curves.csv")).unwrap(),
        fs::read(out_parallel.join("curves.csv")).unwrap()
    );
}

#[test]
fn generate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &tmp.path().join("unused"));

    for dir in ["a", "b"] {
        let out = alpool()
            .arg("--config").arg(&config).arg("--out").arg(tmp.path().join(dir))
            .arg("generate")
            .output().unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }

    let names = |dir: &Path| {
        let mut v: Vec<String> = fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    };
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let files = names(&a);
    assert_eq!(files, names(&b));
    // 24 train + 10 eval tensors plus the manifest.
    assert_eq!(files.len(), 35, "{files:?}");
    for name in &files {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
}

#[test]
fn generated_manifest_feeds_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &out);

    let gen = alpool().arg("--config").arg(&config).arg("--out").arg(&data)
        .arg("generate").output().unwrap();
    assert!(gen.status.success(), "stderr: {}", stderr(&gen));

    let manifest_config = format!(
        r#"
seed = 7
output_dir = "{}"
strategies = ["UNC", "R"]

[dataset]
source = "manifest"
manifest = "{}"

[schedule]
initial_size = 4
additions = [4]
epochs = [3, 3]
trials = 1
"#,
        out.display(),
        data.join("manifest.csv").display()
    );
    let path = tmp.path().join("manifest-exp.toml");
    fs::write(&path, manifest_config).unwrap();
    let run = alpool().arg("--config").arg(&path).arg("run").output().unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    assert!(out.join("curves.csv").is_file());
}

#[test]
fn infeasible_schedule_fails_before_writing_anything() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = format!(
        r#"
output_dir = "{}"
[dataset.synthetic]
classes = 2
feature_dim = 4
height = 3
width = 3
train_samples = 10
eval_samples = 4
blob_height = 2
blob_width = 2
max_labels = 2
[schedule]
initial_size = 8
additions = [8]
epochs = [2, 2]
trials = 1
"#,
        out.display()
    );
    let config = tmp.path().join("exp.toml");
    fs::write(&config, body).unwrap();

    let run = alpool().arg("--config").arg(&config).arg("run").output().unwrap();
    assert_eq!(run.status.code(), Some(1), "stderr: {}", stderr(&run));
    assert!(stderr(&run).contains("schedule needs"), "{}", stderr(&run));
    assert!(!out.exists(), "failed run must not leave outputs behind");
}

#[test]
fn unknown_config_keys_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("exp.toml");
    fs::write(&config, "sede = 3\n").unwrap();
    let run = alpool().arg("--config").arg(&config).arg("run").output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("sede"), "{}", stderr(&run));
}

#[test]
fn report_on_a_missing_directory_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("never-ran");
    let report = alpool().arg("report").arg(&missing).output().unwrap();
    assert_eq!(report.status.code(), Some(2));
    assert!(stderr(&report).contains("runs.jsonl"), "{}", stderr(&report));
}

#[test]
fn unwritable_output_path_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    // A file where a directory is needed makes create_dir_all fail even as root.
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let config = write_config(tmp.path(), &blocker.join("out"));
    let run = alpool().arg("--config").arg(&config).arg("generate").output().unwrap();
    assert_eq!(run.status.code(), Some(2), "stderr: {}", stderr(&run));
}

#[test]
fn seed_flag_overrides_the_file_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &out);
    let run = alpool()
        .arg("--config").arg(&config).args(["--seed", "11", "run"])
        .output().unwrap();
    assert!(run.status.success(), "stderr: {}", stderr(&run));
    let snapshot = fs::read_to_string(out.join("config.snapshot")).unwrap();
    assert!(snapshot.contains("seed = 11"), "{snapshot}");
}

#[test]
fn zero_jobs_is_a_usage_error() {
    let run = alpool().args(["--jobs", "0", "run"]).output().unwrap();
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("--jobs"), "{}", stderr(&run));
}
