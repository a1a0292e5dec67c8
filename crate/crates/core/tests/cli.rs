use std::process::{Command, Output};
use std::sync::Arc;

use scvamp::channel::HMode;
use scvamp::denoiser::builtin::builtin;
use scvamp::experiment::{ber_sweep, mse_trace_experiment, SweepConfig};
use scvamp::likelihood::Nonlinearity;
use scvamp::runner::AlgorithmVariant;

fn scvamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scvamp")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(csv: &str) -> Vec<String> {
    csv.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let idx = header(csv).iter().position(|h| h == name).unwrap();
    data_rows(csv).into_iter().map(|r| r[idx].clone()).collect()
}

#[test]
fn noiseless_single_frame() {
    let out = scvamp(&[
        "--code", "builtin:r12-n128", "--snr-db", "200", "--variant", "scvamp3",
        "--min-errors", "1", "--max-seeds", "1", "--deterministic",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    assert_eq!(column(&csv, "frames"), vec!["1"]);
    assert_eq!(column(&csv, "bit_errors"), vec!["0"]);
    assert_eq!(column(&csv, "ber").iter().map(|b| b.parse::<f64>().unwrap()).collect::<Vec<_>>(), vec![0.0]);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["--snr-db", "5"],
        vec!["--code", "builtin:r12-n128", "--snr-db", "5:4:1"],
        vec!["--code", "builtin:r12-n128", "--snr-db", "5", "--variant", "bogus"],
        vec!["--code", "builtin:r12-n128", "--snr-db", "5", "--min-errors", "0"],
        vec!["--code", "builtin:r12-n128", "--snr-db", "5", "--h", "blockdiag:0"],
        vec!["--code", "builtin:r12-n128", "--snr-db", "4,5", "--experiment", "mse-trace"],
    ] {
        let out = scvamp(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let out = scvamp(&["--code", "/nonexistent/code.alist", "--snr-db", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/code.alist"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.alist");
    std::fs::write(&bad, "3 1\n1 3\n1 1 1\n3\n1\n0\n1\n1 2 3\n").unwrap();
    let out = scvamp(&["--code", bad.to_str().unwrap(), "--snr-db", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));
}

#[test]
fn snr_range_expands_inclusively() {
    let out = scvamp(&[
        "--code", "builtin:r12-n128", "--snr-db", "4:8:0.5", "--variant", "scvamp3",
        "--min-errors", "1", "--max-seeds", "1", "--outer-iters", "2", "--bp-iters", "2",
    ]);
    assert!(out.status.success());
    let snrs: Vec<f64> = column(&stdout(&out), "snr_db").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(snrs, vec![4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0]);
}

#[test]
fn deterministic_output_is_byte_identical_and_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = |workers: &'static str| {
        vec![
            "--code", "builtin:r12-n128", "--snr-db", "5", "--min-errors", "20", "--max-seeds", "40",
            "--deterministic", "--workers", workers, "--out", path.to_str().unwrap(),
        ]
    };
    assert!(scvamp(&args("1")).status.success());
    let first = std::fs::read(&path).unwrap();
    assert!(scvamp(&args("3")).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), first);
    // Nothing but the output file is left behind.
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("sweep.csv")]);

    let text = String::from_utf8(first).unwrap();
    assert!(!text.contains("generated_unix"));
    assert!(text.starts_with("# experiment=ber"));
}

#[test]
fn comment_header_records_run() {
    let out = scvamp(&[
        "--code", "builtin:r12-n128", "--snr-db", "6", "--variant", "scvamp3",
        "--min-errors", "1", "--max-seeds", "1", "--capacity-db", "1.5", "--debug-hash",
    ]);
    let csv = stdout(&out);
    assert!(csv.lines().any(|l| l.starts_with("# generated_unix=")));
    assert!(csv.lines().any(|l| l == "# capacity_db=1.5"));
    assert!(header(&csv).contains(&"realization_hash".to_string()));
}

#[test]
fn mse_trace_starts_at_signal_power() {
    let out = scvamp(&[
        "--experiment", "mse-trace", "--code", "builtin:r12-n128", "--snr-db", "6", "--trials", "4",
        "--variant", "scvamp3,no-onsager",
    ]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let iters = column(&csv, "iteration");
    assert_eq!(iters.len(), 2 * 21);
    let means = column(&csv, "mean_mse");
    for (it, m) in iters.iter().zip(&means) {
        if it == "0" {
            assert_eq!(m.parse::<f64>().unwrap(), 1.0);
        }
    }
}

#[test]
fn variants_share_realizations() {
    let config = SweepConfig {
        snr_db: vec![5.0, 6.0],
        variants: AlgorithmVariant::ALL.to_vec(),
        min_errors: u64::MAX,
        max_seeds: 6,
        debug_hash: true,
        ..SweepConfig::default()
    };
    let points = ber_sweep(&config, Arc::new(builtin("r12-n128").unwrap())).unwrap();
    for snr in [5.0, 6.0] {
        let hashes: Vec<u64> = points.iter().filter(|p| p.snr_db == snr).map(|p| p.realization_hash).collect();
        assert_eq!(hashes.len(), 4);
        assert!(hashes.iter().all(|&h| h == hashes[0]));
    }
}

#[test]
fn adaptive_stop_respects_limits() {
    let config = SweepConfig {
        snr_db: vec![3.0, 12.0],
        variants: vec![AlgorithmVariant::ScVamp3, AlgorithmVariant::NoOnsager],
        nonlinearity: Nonlinearity::Tanh,
        h_mode: Some(HMode::BlockDiagonal { block: 32 }),
        min_errors: 40,
        max_seeds: 30,
        ..SweepConfig::default()
    };
    let points = ber_sweep(&config, Arc::new(builtin("r12-n128").unwrap())).unwrap();
    for p in &points {
        assert!(p.frames >= 1 && p.frames <= config.max_seeds);
        assert_eq!(p.bits, 128 * p.frames);
        if p.frames < config.max_seeds {
            assert!(p.bit_errors >= config.min_errors, "{p:?}");
        }
    }
    // At 3 dB the error budget is reached long before the seed cap.
    let low = points.iter().find(|p| p.snr_db == 3.0).unwrap();
    assert!(low.frames < config.max_seeds);
}

#[test]
fn trace_experiment_pads_to_full_length() {
    let config = SweepConfig {
        snr_db: vec![8.0],
        variants: vec![AlgorithmVariant::ScVamp3],
        trials: 5,
        early_stop: true,
        ..SweepConfig::default()
    };
    let rows = mse_trace_experiment(&config, Arc::new(builtin("r12-n128").unwrap())).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.trials == 5));
    assert!(rows.windows(2).all(|w| w[1].iteration == w[0].iteration + 1));
}
