//! End-to-end tests of the command-line interface: exit codes, file
//! round-trips, and byte-level reproducibility of seeded runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nbldpc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("nbldpc-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

const TABLE_ROW_1: &str = "0.62,4.97,-18.24,27.53,-23.28,10.75,-2.09";

#[test]
fn analyze_polynomial_reports_iteration_counts() {
    let out = run(&["analyze", "--chart-poly", TABLE_ROW_1, "--p0", "0.01", "--pt", "1e-6"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let est: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("estimated_iterations "))
        .unwrap()
        .parse()
        .unwrap();
    // Frozen regression for the printed-polynomial quadrature.
    assert!((est - 19.6347).abs() < 0.05, "estimate {est}");
    assert!(text.contains("discrete_iterations 20"), "{text}");
}

#[test]
fn analyze_rejects_inverted_targets() {
    let out = run(&["analyze", "--chart-poly", TABLE_ROW_1, "--p0", "1e-6", "--pt", "0.01"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn analyze_reports_nonconvergence_with_exit_one() {
    let out = run(&["analyze", "--chart-poly", "1.5", "--p0", "0.01", "--pt", "1e-6"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("fixed point"), "{err}");
}

#[test]
fn analyze_binary_ensemble_reduces_to_binary_formulas() {
    // A (3,6)-regular binary ensemble: the complexity must equal
    // N (1-R) / (R sum rho_k/k) exactly since log2(2) = 1.
    let path = write_tmp("regular36.txt", "q 2\nlambda 3 1\nrho 6 1\n");
    let out = run(&[
        "analyze",
        "--ensemble",
        path.to_str().unwrap(),
        "--p0",
        "0.02",
        "--pt",
        "1e-6",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let pick = |key: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(key)).unwrap().trim().parse().unwrap()
    };
    let n = pick("estimated_iterations ");
    let k = pick("complexity_per_info_bit ");
    assert!((k - n * 0.5 / (0.5 * (1.0 / 6.0))).abs() < 1e-2, "k = {k}, n = {n}");
}

fn feasible_start_file(name: &str) -> PathBuf {
    // Feasible {2,3}-variable start at rate 0.30.
    let dd = nbldpc::reference::two_point_ensemble(2.9, 2.9 / 0.7).unwrap();
    write_tmp(name, &nbldpc::ensemble::write_ensemble(&dd, 4))
}

#[test]
fn design_improves_and_is_byte_reproducible() {
    let init = feasible_start_file("design_init.txt");
    let out1 = tmp("design_out1.txt");
    let traj1 = tmp("design_traj1.csv");
    let args = |o: &Path, t: &Path| {
        vec![
            "design".to_string(),
            "--init".into(),
            init.to_str().unwrap().into(),
            "--r0".into(),
            "0.25".into(),
            "--pt".into(),
            "1e-6".into(),
            "--rounds".into(),
            "10".into(),
            "--seed".into(),
            "5".into(),
            "--out".into(),
            o.to_str().unwrap().to_string(),
            "--trajectory".into(),
            t.to_str().unwrap().to_string(),
        ]
    };
    let out = bin().args(args(&out1, &traj1)).output().unwrap();
    assert!(out.status.success(), "{out:?}");

    // The trajectory complexity column is nonincreasing and ends lower than
    // it starts.
    let traj = read(&traj1);
    let ks: Vec<f64> = traj
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("round"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(ks.len() >= 2, "{traj}");
    assert!(ks.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    assert!(ks.last().unwrap() < &(ks[0] * 0.9), "{ks:?}");

    // Identical invocation, identical bytes.
    let out2 = tmp("design_out2.txt");
    let traj2 = tmp("design_traj2.csv");
    let out = bin().args(args(&out2, &traj2)).output().unwrap();
    assert!(out.status.success());
    // The manifests echo the output paths, so compare payloads only.
    let payload = |p: &Path| -> String {
        read(p).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(payload(&out1), payload(&out2));
    assert_eq!(payload(&traj1), payload(&traj2));
}

#[test]
fn design_from_stationary_point_changes_nothing() {
    let init = feasible_start_file("design_stat_init.txt");
    let first = tmp("design_stat_out1.txt");
    let run1 = bin()
        .args([
            "design",
            "--init",
            init.to_str().unwrap(),
            "--r0",
            "0.25",
            "--p0",
            "0.1",
            "--pt",
            "1e-6",
            "--rounds",
            "20",
            "--seed",
            "5",
            "--out",
            first.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(run1.status.success(), "{run1:?}");

    // Re-optimizing the optimum at the same design point accepts no steps.
    let second = tmp("design_stat_out2.txt");
    let run2 = bin()
        .args([
            "design",
            "--init",
            first.to_str().unwrap(),
            "--r0",
            "0.25",
            "--p0",
            "0.1",
            "--pt",
            "1e-6",
            "--rounds",
            "20",
            "--seed",
            "5",
            "--out",
            second.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(run2.status.success(), "{run2:?}");
    let k1: f64 = stdout(&run1)
        .lines()
        .find_map(|l| l.strip_prefix("complexity_per_info_bit "))
        .unwrap()
        .parse()
        .unwrap();
    let k2: f64 = stdout(&run2)
        .lines()
        .find_map(|l| l.strip_prefix("complexity_per_info_bit "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((k2 - k1).abs() / k1 < 2e-4, "restart moved the optimum: {k1} -> {k2}");
    let payload = |p: &Path| -> String {
        read(p).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(payload(&first), payload(&second), "stationary input must pass through");
}

#[test]
fn design_rejects_oversized_trust_region() {
    let init = write_tmp("design_badzeta.txt", "q 4\nlambda 3 1\nrho 6 1\n");
    let out = run(&[
        "design",
        "--init",
        init.to_str().unwrap(),
        "--r0",
        "0.4",
        "--zeta1",
        "0.3",
        "--out",
        tmp("never.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn construct_round_trips_and_reports_girth() {
    let ens = write_tmp("construct_24.txt", "q 4\nlambda 2 1\nrho 4 1\n");
    let matrix1 = tmp("construct_m1.txt");
    let out = run(&[
        "construct",
        "--ensemble",
        ens.to_str().unwrap(),
        "--n",
        "8",
        "--seed",
        "3",
        "--out",
        matrix1.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let h = nbldpc::graph::read_matrix(&read(&matrix1)).unwrap();
    assert_eq!(h.n(), 8);
    assert_eq!(h.q(), 4);
    // Printed girth matches a fresh measurement of the written matrix.
    let printed = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("girth ").map(str::to_string))
        .unwrap();
    assert_eq!(printed, nbldpc::graph::girth(&h).to_string());

    // Same seed, same bytes.
    let matrix2 = tmp("construct_m2.txt");
    let out = run(&[
        "construct",
        "--ensemble",
        ens.to_str().unwrap(),
        "--n",
        "8",
        "--seed",
        "3",
        "--out",
        matrix2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let payload = |p: &Path| -> String {
        read(p).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(payload(&matrix1), payload(&matrix2));
}

#[test]
fn construct_rejects_unrealizable_block_length() {
    // 9 degree-2 variables give 18 edges, which degree-4 checks cannot
    // cover exactly.
    let ens = write_tmp("construct_bad.txt", "q 4\nlambda 2 1\nrho 4 1\n");
    let out = run(&[
        "construct",
        "--ensemble",
        ens.to_str().unwrap(),
        "--n",
        "9",
        "--out",
        tmp("never2.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn simulate_zero_noise_and_worker_independence() {
    let ens = write_tmp("sim_ens.txt", "q 4\nlambda 3 1\nrho 6 1\n");
    let matrix = tmp("sim_matrix.txt");
    assert!(run(&[
        "construct",
        "--ensemble",
        ens.to_str().unwrap(),
        "--n",
        "24",
        "--seed",
        "9",
        "--out",
        matrix.to_str().unwrap(),
    ])
    .status
    .success());

    let csv1 = tmp("sim_out1.csv");
    let base = |outfile: &Path, workers: &str| {
        vec![
            "simulate".to_string(),
            "--matrix".into(),
            matrix.to_str().unwrap().into(),
            "--decoder".into(),
            "gallager-b".into(),
            "--sweep".into(),
            "eps:0.0,0.05".into(),
            "--max-iter".into(),
            "8".into(),
            "--min-word-errors".into(),
            "10".into(),
            "--max-trials".into(),
            "400".into(),
            "--seed".into(),
            "12".into(),
            "--workers".into(),
            workers.to_string(),
            "--out".into(),
            outfile.to_str().unwrap().to_string(),
        ]
    };
    let out = bin().args(base(&csv1, "1")).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = read(&csv1);
    let zero_row = text
        .lines()
        .find(|l| l.starts_with("0,"))
        .expect("epsilon 0 row present");
    let mut cols = zero_row.split(',');
    assert_eq!(cols.next(), Some("0"));
    assert_eq!(cols.next(), Some("0"), "ber must be zero: {zero_row}");
    assert_eq!(cols.next(), Some("0"), "wer must be zero: {zero_row}");

    let csv2 = tmp("sim_out2.csv");
    let out = bin().args(base(&csv2, "2")).output().unwrap();
    assert!(out.status.success());
    let payload = |p: &Path| -> String {
        read(p)
            .lines()
            .filter(|l| !l.starts_with("# command") && !l.starts_with("# manifest"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(payload(&csv1), payload(&csv2), "worker count changed results");
}

#[test]
fn tables_match_published_values() {
    let dir = tmp("tables_out");
    let out = run(&["tables", "--out-dir", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");

    let iter = read(&dir.join("iteration_table.csv"));
    let mut rows = 0;
    for line in iter.lines().filter(|l| !l.starts_with('#') && !l.starts_with("mean_")) {
        let cols: Vec<&str> = line.split(',').collect();
        let est: f64 = cols[2].parse().unwrap();
        let actual: f64 = cols[3].parse().unwrap();
        let pub_est: f64 = cols[4].parse().unwrap();
        let pub_actual: f64 = cols[5].parse().unwrap();
        assert!((est - pub_est).abs() <= 0.5, "{line}");
        assert!((actual - pub_actual).abs() <= 1.0, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 5);

    let weights = read(&dir.join("min_column_weight_table.csv"));
    let mut last = 0.0;
    let mut rows = 0;
    for line in weights.lines().filter(|l| !l.starts_with('#') && !l.starts_with("rate")) {
        let cols: Vec<&str> = line.split(',').collect();
        let got: f64 = cols[1].parse().unwrap();
        let published: f64 = cols[2].parse().unwrap();
        assert!((got - published).abs() <= 0.15, "{line}");
        assert!(got >= last - 1e-9, "not monotone: {line}");
        last = got;
        rows += 1;
    }
    assert_eq!(rows, 6);
}
