//! End-to-end tests of the command-line binary: file round trips, report
//! arithmetic, exit codes, and byte-level determinism across worker counts.

use std::path::Path;
use std::process::{Command, Output};

use mrfpic::cli::{parse_gamma, read_sample, write_sample};
use mrfpic::estimator::{estimate, EstimateConfig};
use mrfpic::lattice::Region;
use mrfpic::model::Potential;
use mrfpic::pseudolik::pic;
use mrfpic::sampler::{gibbs_sample, Sample};

fn run_in(dir: &Path, threads: Option<&str>, args: &[&str]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_mrfpic"));
    command.current_dir(dir).args(args).env_remove("MRF_THREADS");
    if let Some(threads) = threads {
        command.env("MRF_THREADS", threads);
    }
    command.output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn simulate_writes_deterministic_files_matching_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "simulate",
        "--model",
        "ising",
        "--beta",
        "0.3",
        "--dims",
        "24x24",
        "--sweeps",
        "40",
        "--burn-in",
        "80",
        "--seed",
        "42",
    ];
    let mut first = flags.to_vec();
    first.extend(["--out", "a.mrfs"]);
    let mut second = flags.to_vec();
    second.extend(["--out", "b.mrfs"]);
    stdout_of(&run_in(dir.path(), None, &first));
    stdout_of(&run_in(dir.path(), None, &second));
    let a = std::fs::read(dir.path().join("a.mrfs")).unwrap();
    let b = std::fs::read(dir.path().join("b.mrfs")).unwrap();
    assert_eq!(a, b);

    let from_file = read_sample(&dir.path().join("a.mrfs")).unwrap();
    let p = Potential::ising(2, 0.3).unwrap();
    let direct = gibbs_sample(&p, &[24, 24], 40, 80, 42).unwrap();
    assert_eq!(from_file, direct);
}

#[test]
fn simulate_rejects_axes_shorter_than_the_interaction_reach() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(
        dir.path(),
        None,
        &[
            "simulate", "--dims", "3x3", "--range", "2", "--sweeps", "5", "--out", "x.mrfs",
        ],
    );
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("axis"), "{stderr}");
}

#[test]
fn estimate_report_agrees_with_independent_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    stdout_of(&run_in(
        dir.path(),
        None,
        &[
            "simulate", "--beta", "0.35", "--dims", "48x48", "--sweeps", "60", "--seed", "11",
            "--out", "s.mrfs",
        ],
    ));
    stdout_of(&run_in(
        dir.path(),
        None,
        &[
            "estimate", "--input", "s.mrfs", "--radius", "1", "--out", "report.txt",
        ],
    ));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let sample = read_sample(&dir.path().join("s.mrfs")).unwrap();

    let selected_line = report
        .lines()
        .find_map(|line| line.strip_prefix("selected = "))
        .expect("selected key");
    let library = estimate(&sample, &EstimateConfig::new(1)).unwrap();
    assert_eq!(selected_line, library.selected().to_string());

    let table_start = report.find("[candidates]").expect("candidate table");
    let mut rows = 0;
    for line in report[table_start..].lines().skip(2) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            continue;
        }
        let reported: f64 = fields[5].parse().unwrap();
        let (gamma, _) = parse_gamma(fields[6], 2).unwrap();
        let recomputed = pic(&sample, &gamma, 1.0).unwrap().pic;
        assert!(
            (reported - recomputed).abs() <= 1e-12,
            "{gamma}: reported {reported}, recomputed {recomputed}"
        );
        rows += 1;
    }
    assert_eq!(rows, 16);
}

#[test]
fn estimate_refuses_radii_beyond_the_window_without_override() {
    let dir = tempfile::tempdir().unwrap();
    stdout_of(&run_in(
        dir.path(),
        None,
        &[
            "simulate", "--dims", "16x16", "--sweeps", "20", "--seed", "1", "--out", "t.mrfs",
        ],
    ));
    let output = run_in(
        dir.path(),
        None,
        &["estimate", "--input", "t.mrfs", "--radius", "5"],
    );
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("--force-radius"), "{stderr}");
    let forced = run_in(
        dir.path(),
        None,
        &[
            "estimate",
            "--input",
            "t.mrfs",
            "--radius",
            "2",
            "--force-radius",
        ],
    );
    assert!(forced.status.success());
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), None, &["estimate", "--input", "missing.mrfs"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn diagnose_reports_certain_rows_on_a_constant_sample() {
    let dir = tempfile::tempdir().unwrap();
    let region = Region::from_dims(&[32, 32]).unwrap();
    let sample = Sample::new(region, 2, vec![0; 1024]).unwrap();
    write_sample(&sample, &dir.path().join("const.mrfs")).unwrap();
    let output = run_in(
        dir.path(),
        None,
        &[
            "diagnose",
            "--input",
            "const.mrfs",
            "--gamma",
            "(0,1);(1,0)",
            "--beta",
            "3",
        ],
    );
    let report = stdout_of(&output);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warning"), "{stderr}");
    assert!(report.contains("blocks = 1"), "{report}");
    assert!(report.contains("all_pass = true"), "{report}");
    assert!(report.contains("\n0,0,0,0\t900\t1\t0\n"), "{report}");
}

#[test]
fn diagnose_rejects_gammas_missing_the_model_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let region = Region::from_dims(&[16, 16]).unwrap();
    let sample = Sample::new(region, 2, vec![0; 256]).unwrap();
    write_sample(&sample, &dir.path().join("c.mrfs")).unwrap();
    let output = run_in(
        dir.path(),
        None,
        &["diagnose", "--input", "c.mrfs", "--gamma", "(0,1)"],
    );
    assert_eq!(output.status.code(), Some(1));
    let bad = run_in(
        dir.path(),
        None,
        &["diagnose", "--input", "c.mrfs", "--gamma", "(1,0;(0,1)"],
    );
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("byte"), "{stderr}");
}

#[test]
fn sweep_rows_cover_every_cell_and_rerun_identically() {
    let flags = [
        "sweep",
        "--sizes",
        "16x16,24x24",
        "--replicates",
        "2",
        "--sweeps",
        "40",
        "--seed",
        "7",
        "--radius",
        "1",
        "--csv",
        "out.csv",
    ];
    let first_dir = tempfile::tempdir().unwrap();
    let second_dir = tempfile::tempdir().unwrap();
    let first = stdout_of(&run_in(first_dir.path(), Some("1"), &flags));
    let second = stdout_of(&run_in(second_dir.path(), Some("3"), &flags));
    assert_eq!(first, second);

    let strip_wall = |path: &Path| -> Vec<Vec<String>> {
        let mut reader = csv::Reader::from_path(path).unwrap();
        reader
            .records()
            .map(|record| {
                let record = record.unwrap();
                record.iter().take(7).map(str::to_string).collect()
            })
            .collect()
    };
    let rows_a = strip_wall(&first_dir.path().join("out.csv"));
    let rows_b = strip_wall(&second_dir.path().join("out.csv"));
    assert_eq!(rows_a, rows_b);
    assert_eq!(rows_a.len(), 4);
    for row in &rows_a {
        assert!(["exact", "over", "under", "mixed"].contains(&row[5].as_str()));
        assert_eq!(row[4] == "true", row[5] == "exact");
    }
    assert_eq!(rows_a[0][0], "16x16");
    assert_eq!(rows_a[3][0], "24x24");
    assert_eq!(rows_a[3][1], "1");
}

#[test]
fn worker_count_flag_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), Some("0"), &["estimate", "--input", "x.mrfs"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("MRF_THREADS"), "{stderr}");
}

#[test]
fn help_and_version_exit_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let help = run_in(dir.path(), None, &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let version = run_in(dir.path(), None, &["--version"]);
    assert_eq!(version.status.code(), Some(0));
    let usage = run_in(dir.path(), None, &["estimate"]);
    assert_eq!(usage.status.code(), Some(1));
}
